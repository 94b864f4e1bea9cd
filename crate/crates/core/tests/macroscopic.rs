mod common;

use std::f64::consts::PI;

use common::random_field;
use kinlab::collision::VelocityGrid;
use kinlab::lp::{DyadicSystem, FourierGrid, SpectralField, DEFAULT_SHARPNESS};
use kinlab::macroscopic::{
    difference_stencil, frame_residuals, inner_x, interactive_functional, InteractiveParams, MomentFrame,
    MomentOperators,
};
use ndarray::Array2;

/// `(a + ξ·b + (|ξ|²-3)c)√μ` from physical coefficient rows `[a, b₁, b₂, b₃, c]`.
fn assemble(vg: &VelocityGrid, grid: &FourierGrid, abc: &Array2<f64>) -> SpectralField {
    let phys = Array2::from_shape_fn((vg.len(), grid.len()), |(r, x)| {
        let v = vg.node(r);
        let s = vg.sqrt_mu()[r];
        let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        s * (abc[[0, x]] + v[0] * abc[[1, x]] + v[1] * abc[[2, x]] + v[2] * abc[[3, x]] + (q - 3.0) * abc[[4, x]])
    });
    SpectralField::from_physical(grid, &phys).unwrap()
}

fn wave_coeffs(grid: &FourierGrid) -> Array2<f64> {
    Array2::from_shape_fn((5, grid.len()), |(r, x)| {
        let t = grid.point(x)[0];
        match r {
            0 => 1.0 + (2.0 * t).cos(),
            1 => t.sin(),
            2 => 0.5 * (3.0 * t).cos(),
            3 => 0.0,
            _ => 0.2 * t.cos(),
        }
    })
}

#[test]
fn projection_recovers_known_coefficients() {
    let vg = VelocityGrid::new(6.0, 8).unwrap();
    let grid = FourierGrid::new(1, 16).unwrap();
    let ops = MomentOperators::new(&vg);
    let abc = wave_coeffs(&grid);
    let f = assemble(&vg, &grid, &abc);
    let (coeffs, pf, micro) = ops.project(&f).unwrap();
    let got = coeffs.fields.to_physical();
    for (a, b) in got.iter().zip(abc.iter()) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    assert!(micro.coeff_norm() < 1e-12 * f.coeff_norm());
    assert!(pf.sub(&f).unwrap().coeff_norm() < 1e-12 * f.coeff_norm());
    assert_eq!(coeffs.a().n_vel(), 1);
    assert!((coeffs.c().to_physical()[[0, 3]] - abc[[4, 3]]).abs() < 1e-12);
}

#[test]
fn projection_is_idempotent_and_orthogonal() {
    let vg = VelocityGrid::new(5.0, 6).unwrap();
    let grid = FourierGrid::new(1, 16).unwrap();
    let ops = MomentOperators::new(&vg);
    let f = random_field(&grid, vg.len(), 6, 17);
    let (_, pf, micro) = ops.project(&f).unwrap();
    let (_, ppf, _) = ops.project(&pf).unwrap();
    assert!(ppf.sub(&pf).unwrap().coeff_norm() < 1e-12 * pf.coeff_norm());
    let (c, _, _) = ops.project(&micro).unwrap();
    assert!(c.fields.coeff_norm() < 1e-12 * f.coeff_norm());
    // Pythagoras in L²_ξ L²_x
    let n2 = |g: &SpectralField| g.coeff_norm().powi(2);
    assert!((n2(&f) - n2(&pf) - n2(&micro)).abs() < 1e-12 * n2(&f));
    assert!(ops.project(&SpectralField::zeros(&grid, 3)).is_err());
}

#[test]
fn moments_of_macroscopic_profiles() {
    // Θ_im((|ξ|²-3)√μ) = 2δ_im and Λ_i(ξ_j√μ) = 0 in the continuum
    let vg = VelocityGrid::new(6.0, 16).unwrap();
    let grid = FourierGrid::new(1, 8).unwrap();
    let ops = MomentOperators::new(&vg);
    let mut abc = Array2::zeros((5, grid.len()));
    abc.row_mut(4).fill(1.0);
    abc.row_mut(1).fill(1.0);
    let f = assemble(&vg, &grid, &abc);
    let m = ops.moments(&f).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let v = m.theta(i, j).to_physical()[[0, 1]];
            let exact = if i == j { 2.0 } else { 0.0 };
            assert!((v - exact).abs() < 1e-4, "theta {i}{j} = {v}");
        }
        assert!(m.lambda(i).to_physical()[[0, 1]].abs() < 1e-4);
    }
    // Λ₁(ξ₁|ξ|²√μ) = 0.1∫(|ξ|²-5)ξ₁²|ξ|²μ = 0.1(35 - 25) = 1
    let phys = Array2::from_shape_fn((vg.len(), grid.len()), |(r, _)| {
        let v = vg.node(r);
        v[0] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * vg.sqrt_mu()[r]
    });
    let g = SpectralField::from_physical(&grid, &phys).unwrap();
    let l = ops.moments(&g).unwrap().lambda(0).to_physical()[[0, 2]];
    assert!((l - 1.0).abs() < 1e-3, "{l}");
}

#[test]
fn streaming_of_a_plane_wave() {
    let vg = VelocityGrid::new(4.0, 4).unwrap();
    let grid = FourierGrid::new(1, 16).unwrap();
    let ops = MomentOperators::new(&vg);
    let k = 3.0;
    let phys = Array2::from_shape_fn((vg.len(), grid.len()), |(r, x)| {
        (k * grid.point(x)[0]).cos() * vg.sqrt_mu()[r]
    });
    let f = SpectralField::from_physical(&grid, &phys).unwrap();
    let s = ops.streaming(&f).to_physical();
    for r in 0..vg.len() {
        let xi = vg.node(r)[0];
        for x in 0..grid.len() {
            let exact = xi * k * (k * grid.point(x)[0]).sin() * vg.sqrt_mu()[r];
            assert!((s[[r, x]] - exact).abs() < 1e-12);
        }
    }
}

#[test]
fn interactive_functional_on_macroscopic_data() {
    // micro = 0 leaves κ₂ Σ_i (∂_i a_q, b_{i,q})
    let vg = VelocityGrid::new(6.0, 6).unwrap();
    let grid = FourierGrid::new(1, 32).unwrap();
    let sys = DyadicSystem::new(&grid, DEFAULT_SHARPNESS).unwrap();
    let ops = MomentOperators::new(&vg);
    let k = 5usize;
    let mut abc = Array2::zeros((5, grid.len()));
    for x in 0..grid.len() {
        let t = grid.point(x)[0];
        abc[[0, x]] = (k as f64 * t).cos();
        abc[[1, x]] = (k as f64 * t).sin();
    }
    let f = assemble(&vg, &grid, &abc);
    let params = InteractiveParams::default();
    for q in sys.blocks() {
        let m = sys.block_multiplier(q).unwrap()[k];
        let got = interactive_functional(&ops, &sys, &f, q, &params).unwrap();
        let exact = -params.kappa2 * k as f64 * PI * m * m;
        assert!((got - exact).abs() < 1e-11, "q {q}: {got} vs {exact}");
    }
    assert!(InteractiveParams { kappa1: 0.01, kappa2: 0.1, kappa3: 0.5 }.validate().is_err());
    params.validate().unwrap();
}

#[test]
fn inner_product_in_x() {
    let grid = FourierGrid::new(1, 16).unwrap();
    let mk = |g: fn(f64) -> f64| {
        let phys = Array2::from_shape_fn((1, grid.len()), |(_, x)| g(grid.point(x)[0]));
        SpectralField::from_physical(&grid, &phys).unwrap()
    };
    let u = mk(|t| t.cos() + 1.0);
    let v = mk(|t| t.cos());
    assert!((inner_x(&u, &v) - PI).abs() < 1e-12);
    assert!((inner_x(&u, &u) - 3.0 * PI).abs() < 1e-12);
}

#[test]
fn stencils_and_equilibrium_residuals() {
    assert_eq!(difference_stencil(0, 5), (0, 1));
    assert_eq!(difference_stencil(2, 5), (1, 3));
    assert_eq!(difference_stencil(4, 5), (3, 4));

    // a uniform macroscopic state with no collision source is a steady solution
    let vg = VelocityGrid::new(5.0, 6).unwrap();
    let grid = FourierGrid::new(1, 8).unwrap();
    let ops = MomentOperators::new(&vg);
    let mut abc = Array2::zeros((5, grid.len()));
    abc.row_mut(0).fill(0.3);
    abc.row_mut(4).fill(-0.1);
    let f = assemble(&vg, &grid, &abc);
    let h = SpectralField::zeros(&grid, vg.len());
    let frames: Vec<_> = (0..3).map(|i| MomentFrame::new(&ops, 0.1 * i as f64, &f, &h).unwrap()).collect();
    let r = frame_residuals(&frames[0], &frames[1], &frames[2]);
    assert!(r.max() < 1e-12, "{r:?}");

    // a pure density wave a = cos x violates mass balance only through ∂_t a
    let mut wave = Array2::zeros((5, grid.len()));
    for x in 0..grid.len() {
        wave[[0, x]] = grid.point(x)[0].cos();
    }
    let g = assemble(&vg, &grid, &wave);
    let later = g.scaled(1.1);
    let lo = MomentFrame::new(&ops, 0.0, &g, &h).unwrap();
    let hi = MomentFrame::new(&ops, 0.5, &later, &h).unwrap();
    let r = frame_residuals(&lo, &lo, &hi);
    // ‖∂_t a‖ = 0.2‖cos‖ = 0.2√π
    assert!((r.mass - 0.2 * PI.sqrt()).abs() < 1e-12, "{r:?}");
    // momentum sees ∂_x a = -sin x
    assert!((r.momentum - PI.sqrt()).abs() < 1e-12, "{r:?}");
}
