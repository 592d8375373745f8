//! Structural invariants that hold across the whole parameter space:
//! distance axioms, mass accounting, exponent-one degeneracy of the
//! power-mean comparison, agreement of the two reproduction pipelines on
//! factorable rates, and second-order grid convergence.

mod common;

use proptest::prelude::*;
use rand::Rng;
use reprorate::monotone_props::{power_mean_check, seeded_rng};
use reprorate::population::{Model, SolverConfig};
use reprorate::stieltjes::{hazard_functional, l1_distance, QuadratureConfig};
use reprorate::{Density, GridFn, Modulation, MonotoneFn, RateSpec, TailSpec, VitalRates};

use common::exp_density;

fn exp_grid_fn(amp: f64, rate: f64, span: f64, n: usize) -> GridFn {
    GridFn::sample(
        |x| amp * (-rate * x).exp(),
        0.0,
        span,
        n,
        Some(TailSpec::ExpDecay { limit: 0.0, rate }),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The L¹ distance of a function to itself is exactly zero, and the
    /// distance is symmetric in its arguments.
    #[test]
    fn l1_distance_axioms(
        a1 in 0.2f64..3.0, r1 in 0.3f64..3.0, s1 in 2.0f64..10.0, n1 in 3usize..40,
        a2 in 0.2f64..3.0, r2 in 0.3f64..3.0, s2 in 2.0f64..10.0, n2 in 3usize..40,
    ) {
        let f = exp_grid_fn(a1, r1, s1, n1);
        let g = exp_grid_fn(a2, r2, s2, n2);
        prop_assert_eq!(l1_distance(&f, &f).unwrap(), 0.0);
        let d_fg = l1_distance(&f, &g).unwrap();
        let d_gf = l1_distance(&g, &f).unwrap();
        prop_assert!(d_fg >= 0.0);
        prop_assert!((d_fg - d_gf).abs() <= 1e-12 * (1.0 + d_fg.abs()),
            "asymmetric distance: {} vs {}", d_fg, d_gf);
    }

    /// Cumulative mass of a density is non-decreasing, bounded by the total,
    /// and complementary to the mass beyond the cut.
    #[test]
    fn density_mass_accounting(
        amp in 0.2f64..2.0, rate in 0.4f64..2.5, seed in any::<u64>(),
    ) {
        let span = (10.0 / rate).max(4.0);
        let u = exp_density(amp, rate, span, 200);
        let mut rng = seeded_rng(seed, 99);
        let mut cuts: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..2.0 * span)).collect();
        cuts.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for &x in &cuts {
            let cum = u.cumulative_mass(x).unwrap();
            prop_assert!(cum + 1e-12 >= prev, "cumulative mass decreased at {x}");
            prop_assert!(cum <= u.total() + 1e-12, "cumulative mass exceeds the total at {x}");
            let beyond = u.mass_beyond(x).unwrap();
            prop_assert!((cum + beyond - u.total()).abs() <= 1e-9 * (1.0 + u.total()),
                "mass split at {} is off: {} + {} != {}", x, cum, beyond, u.total());
            prev = cum;
        }
    }

    /// At exponent one the power-mean comparison degenerates: both sides are
    /// the same integral, reused bit for bit, so the margin is exactly zero.
    #[test]
    fn power_mean_is_degenerate_at_exponent_one(seed in any::<u64>(), improper in any::<bool>()) {
        let mut rng = seeded_rng(seed, 77);
        let (h, g) = reprorate::monotone_props::power_mean_instance(&mut rng, improper);
        let r = power_mean_check(&h, &g, 1.0, &QuadratureConfig::default()).unwrap();
        prop_assert_eq!(r.lhs.to_bits(), r.rhs.to_bits());
        prop_assert_eq!(r.margin.to_bits(), 0.0f64.to_bits());
        prop_assert!(r.holds && !r.reversed);
    }
}

/// Builds a model with unmodulated vital rates `β = h·μ` and `g ≡ 1`; the
/// caller keeps `h` and `μ` for the event-time form of the same number.
fn factorable_model(mu: &GridFn, beta: GridFn) -> Model {
    let rates = VitalRates::new(
        RateSpec { base: beta, modulation: Modulation::None },
        RateSpec { base: mu.clone(), modulation: Modulation::None },
        RateSpec::constant(1.0).unwrap(),
    )
    .unwrap();
    Model::new(rates)
}

/// The event-time side represents the survivor `e^{−∫μ}` piecewise linearly
/// with `panel_points − 1` nodes per source segment, so both factorable
/// comparisons run it at a resolution where that representation error sits
/// well under the 1e-6 agreement budget.
fn fine_quadrature() -> QuadratureConfig {
    QuadratureConfig { panel_points: 4097, ..QuadratureConfig::default() }
}

/// With unit growth the survival profile is `exp(−∫μ)`, so the reproduction
/// number of `β = h·μ` is the event-time functional of `h` under the rate
/// `μ`. Both pipelines must agree; here `h` ramps and `μ` is constant, and
/// the number also has the closed form `(1 − e^{−μ₀})/μ₀`.
#[test]
fn factorable_rates_agree_across_pipelines_constant_loss() {
    for mu0 in [0.5, 1.0, 2.3] {
        let h = GridFn::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            Some(TailSpec::Constant { limit: 1.0 }),
        )
        .unwrap();
        let mu = GridFn::constant(mu0, 0.0, None).unwrap();
        let beta = GridFn::new(
            vec![0.0, 1.0],
            vec![0.0, mu0],
            Some(TailSpec::Constant { limit: mu0 }),
        )
        .unwrap();
        let model = factorable_model(&mu, beta);

        let solver = SolverConfig { model_points: 400_000, ..SolverConfig::default() };
        let r_model = model.net_reproduction(&Density::zero(), &solver).unwrap();

        let weight = MonotoneFn::new(h, reprorate::Direction::NonDecreasing).unwrap();
        let r_event = hazard_functional(&weight, &mu, &fine_quadrature()).unwrap().value;

        let closed = (1.0 - (-mu0).exp()) / mu0;
        assert!(
            (r_model - r_event).abs() < 1e-6,
            "pipelines disagree at mu0={mu0}: {r_model} vs {r_event}"
        );
        assert!(
            (r_event - closed).abs() < 1e-6,
            "event-time value misses the closed form at mu0={mu0}: {r_event} vs {closed}"
        );
        assert!(
            (r_model - closed).abs() < 1e-6,
            "model value misses the closed form at mu0={mu0}: {r_model} vs {closed}"
        );
    }
}

/// Same agreement with interleaved breakpoints: the weight ramps only where
/// the loss rate is constant and vice versa, so the product `β = h·μ` stays
/// exactly piecewise linear.
#[test]
fn factorable_rates_agree_across_pipelines_interleaved() {
    let grid = vec![0.0, 1.0, 2.0, 3.0];
    let h_vals = vec![0.2, 0.8, 0.8, 1.4];
    let mu_vals = vec![1.2, 1.2, 0.6, 0.6];
    let beta_vals: Vec<f64> = h_vals.iter().zip(&mu_vals).map(|(h, m)| h * m).collect();

    let h = GridFn::new(grid.clone(), h_vals, Some(TailSpec::Constant { limit: 1.4 })).unwrap();
    let mu = GridFn::new(grid.clone(), mu_vals, Some(TailSpec::Constant { limit: 0.6 })).unwrap();
    let beta = GridFn::new(grid, beta_vals, Some(TailSpec::Constant { limit: 0.84 })).unwrap();
    let model = factorable_model(&mu, beta);

    let solver = SolverConfig { model_points: 400_000, ..SolverConfig::default() };
    let r_model = model.net_reproduction(&Density::zero(), &solver).unwrap();

    let weight = MonotoneFn::new(h, reprorate::Direction::NonDecreasing).unwrap();
    let r_event = hazard_functional(&weight, &mu, &fine_quadrature()).unwrap().value;

    assert!(
        (r_model - r_event).abs() < 1e-6,
        "pipelines disagree: {r_model} vs {r_event}"
    );
}

/// Halving the model grid spacing must shrink the change in `R` at a
/// second-order rate: each halving changes the value by less than four times
/// the previous halving's change, and the finest value sits on the closed
/// form. Instance: `μ = 1 + e^{−x}`, `g ≡ 1`, `β ≡ 2`, where
/// `R = 2(1 − e^{−1})`.
#[test]
fn reproduction_converges_at_second_order_under_refinement() {
    let mu = GridFn::sample(
        |x| 1.0 + (-x).exp(),
        0.0,
        15.0,
        3_001,
        Some(TailSpec::ExpDecay { limit: 1.0, rate: 1.0 }),
    )
    .unwrap();
    let rates = VitalRates::new(
        RateSpec::constant(2.0).unwrap(),
        RateSpec { base: mu, modulation: Modulation::None },
        RateSpec::constant(1.0).unwrap(),
    )
    .unwrap();
    let model = Model::new(rates);

    let r_at = |n: usize| {
        let cfg = SolverConfig { model_points: n, ..SolverConfig::default() };
        model.net_reproduction(&Density::zero(), &cfg).unwrap()
    };
    let (r1, r2, r3) = (r_at(2_000), r_at(4_000), r_at(8_000));
    let d1 = (r2 - r1).abs();
    let d2 = (r3 - r2).abs();
    assert!(d1 > 0.0, "refinement from 2k to 4k points changed nothing; the probe is too coarse");
    assert!(
        d2 < 4.0 * d1,
        "refinement is not converging: |R(4k)-R(2k)|={d1:e}, |R(8k)-R(4k)|={d2:e}"
    );

    let closed = 2.0 * (1.0 - (-1.0f64).exp());
    assert!(
        (r3 - closed).abs() < 1e-4,
        "finest value {r3} misses the closed form {closed}"
    );
}
