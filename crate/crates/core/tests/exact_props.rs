use num_complex::Complex64;
use proptest::prelude::*;
use ptho_core::exact::*;
use ptho_core::numgrid::{build_operator, Grid, StencilOrder};

/// Explicit sum `Σ_k (-1)^k C(n+a, n-k) z^k / k!`, independent of the recurrence.
fn laguerre_series(n: u32, a: f64, z: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let mut binom = 1.0;
        for j in 1..=(n - k) {
            binom *= (a + f64::from(k) + f64::from(j)) / f64::from(j);
        }
        let fact: f64 = (1..=k).map(f64::from).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += z.powu(k) * (sign * binom / fact);
    }
    total
}

fn complex_disc(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #[test]
    fn laguerre_matches_explicit_sum(n in 0u32..12, a in -3.0f64..3.0, z in complex_disc(10.0)) {
        let rec = laguerre(n, a, z);
        let series = laguerre_series(n, a, z);
        prop_assert!((rec - series).norm() <= 1e-9 * (1.0 + z.norm()).powi(n as i32 + 1));
    }

    #[test]
    fn laguerre_negative_order_identity(n in 0u32..=8, z in complex_disc(10.0)) {
        // (n+1) L_{n+1}^{(-1)}(z) = -z L_n^{(1)}(z)
        let lhs = laguerre(n + 1, -1.0, z) * f64::from(n + 1);
        let rhs = -z * laguerre(n, 1.0, z);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + z.norm()).powi(n as i32 + 1));
    }

    #[test]
    fn crossing_at_integer_alpha(n in 0u32..50, k in 1u32..20) {
        let alpha = f64::from(k);
        prop_assert_eq!(energy(LevelLabel::plus(n + k), alpha), energy(LevelLabel::minus(n), alpha));
    }

    #[test]
    fn branches_are_symmetric_about_oscillator_levels(n in 0u32..50, alpha in 0.0f64..20.0) {
        let sum = energy(LevelLabel::plus(n), alpha) + energy(LevelLabel::minus(n), alpha);
        prop_assert!((sum - f64::from(8 * n + 4)).abs() <= 1e-12 * sum.abs().max(1.0));
    }
}

#[test]
fn ep_location_round_trip() {
    for k in 0..=10u32 {
        let alpha = alpha_from_coupling(ep_location(k)).real().unwrap();
        assert!((alpha - f64::from(k)).abs() <= 1e-14, "K = {k}: {alpha}");
    }
}

/// Cells of the EP degeneracy table for `α = K`, energies up to 10.
fn reference_table(k: u32) -> Vec<(f64, Vec<LevelLabel>)> {
    use LevelLabel as L;
    match k {
        0 => vec![
            (2.0, vec![L::plus(0), L::minus(0)]),
            (6.0, vec![L::plus(1), L::minus(1)]),
            (10.0, vec![L::plus(2), L::minus(2)]),
        ],
        1 => vec![
            (0.0, vec![L::plus(0)]),
            (4.0, vec![L::minus(0), L::plus(1)]),
            (8.0, vec![L::minus(1), L::plus(2)]),
        ],
        2 => vec![
            (-2.0, vec![L::plus(0)]),
            (2.0, vec![L::plus(1)]),
            (6.0, vec![L::minus(0), L::plus(2)]),
            (10.0, vec![L::minus(1), L::plus(3)]),
        ],
        3 => vec![
            (-4.0, vec![L::plus(0)]),
            (0.0, vec![L::plus(1)]),
            (4.0, vec![L::plus(2)]),
            (8.0, vec![L::minus(0), L::plus(3)]),
        ],
        // the α = 4 entry at energy 10 is printed as E_1^(-) = E_4^(+) in the
        // source table, but E_1^(-)(4) = 14; the member is E_0^(-)
        4 => vec![
            (-6.0, vec![L::plus(0)]),
            (-2.0, vec![L::plus(1)]),
            (2.0, vec![L::plus(2)]),
            (6.0, vec![L::plus(3)]),
            (10.0, vec![L::minus(0), L::plus(4)]),
        ],
        _ => unreachable!(),
    }
}

#[test]
fn degeneracy_tables_match_reference_cell_for_cell() {
    for k in 0..=4 {
        let table = degeneracy_table(k, 10.0);
        let got: Vec<(f64, Vec<LevelLabel>)> = table.rows.iter().map(|r| (r.energy, r.members.clone())).collect();
        let mut want = reference_table(k);
        for (_, members) in &mut want {
            members.sort();
        }
        assert_eq!(got, want, "K = {k}");
    }
}

#[test]
fn degeneracy_structure_above_ep() {
    for k in 1..=6u32 {
        let table = degeneracy_table(k, 60.0);
        let singles: Vec<f64> = table.rows.iter().filter(|r| !r.is_degenerate()).map(|r| r.energy).collect();
        let expected: Vec<f64> = (0..k).map(|j| -2.0 * f64::from(k) + 2.0 + 4.0 * f64::from(j)).collect();
        assert_eq!(singles, expected);
        for row in table.rows.iter().filter(|r| r.is_degenerate()) {
            let n = (row.energy - 2.0 * f64::from(k) - 2.0) / 4.0;
            assert_eq!(n.fract(), 0.0);
            assert_eq!(row.members, vec![LevelLabel::minus(n as u32), LevelLabel::plus(n as u32 + k)]);
        }
    }
}

/// Largest stencil residual `|(Hψ - Eψ)_j|` over nodes whose stencil lies
/// inside the grid, relative to `max |ψ|`.
fn ode_residual(label: LevelLabel, params: &ModelParams, grid: &Grid) -> f64 {
    let op = build_operator(params, grid, StencilOrder::Fourth);
    let psi: Vec<Complex64> = grid.nodes().map(|x| wavefunction(label, params, x).unwrap()).collect();
    let applied = op.apply(&psi);
    let e = energy(label, params.alpha().real().unwrap());
    let scale = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = psi.len();
    (2..n - 2)
        .map(|j| (applied[j] - psi[j] * e).norm())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn wavefunctions_solve_the_discretized_equation_to_fourth_order() {
    let grid = Grid::new(6.0, 119).unwrap();
    let fine = grid.refined();
    for alpha in [0.3, 0.5, 1.7] {
        let params = ModelParams::from_alpha(alpha, 1.0).unwrap();
        for n in 0..=4 {
            for q in QuasiParity::BOTH {
                let label = LevelLabel::new(n, q);
                let coarse = ode_residual(label, &params, &grid);
                let refined = ode_residual(label, &params, &fine);
                let ratio = coarse / refined;
                assert!(ratio >= 12.0, "{label} at alpha {alpha}: {coarse:e} -> {refined:e} (x{ratio:.2})");
            }
        }
    }
}

#[test]
fn wavefunction_rejects_broken_phase() {
    let params = ModelParams::from_coupling(-0.5, 1.0).unwrap();
    assert!(wavefunction(LevelLabel::plus(0), &params, 0.0).is_err());
}
