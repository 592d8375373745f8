//! Shared instance generators for the integration-test suites.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reprorate::{
    Density, EnvironmentKernel, GridFn, Modulation, RateSpec, Response, TailSpec, VitalRates,
};

/// Constant rates with no crowding response at all.
pub fn constant_rates(beta: f64, mu: f64, growth: f64) -> VitalRates {
    VitalRates::new(
        RateSpec::constant(beta).unwrap(),
        RateSpec::constant(mu).unwrap(),
        RateSpec::constant(growth).unwrap(),
    )
    .unwrap()
}

/// Constant births and growth; losses scale linearly with the total mass:
/// `μ(x, u) = μ₀ (1 + c·∫u)`. The family with a fully analytic stationary
/// state: `R(u) = β₀ / (μ₀ (1 + c P))`, so `R = 1` at `P* = (β₀/μ₀ − 1)/c`.
pub fn crowding_loss_rates(beta: f64, mu: f64, growth: f64, c: f64) -> VitalRates {
    VitalRates::new(
        RateSpec::constant(beta).unwrap(),
        RateSpec {
            base: GridFn::constant(mu, 0.0, None).unwrap(),
            modulation: Modulation::Scale {
                response: Response::LinearUp,
                kernel: EnvironmentKernel::Total,
                c,
            },
        },
        RateSpec::constant(growth).unwrap(),
    )
    .unwrap()
}

/// `amp · e^{−rate·x}` sampled on `[0, span]` with the exact exponential
/// tail, as a density.
pub fn exp_density(amp: f64, rate: f64, span: f64, n: usize) -> Density {
    Density::new(
        GridFn::sample(
            |x| amp * (-rate * x).exp(),
            0.0,
            span,
            n,
            Some(TailSpec::ExpDecay { limit: 0.0, rate }),
        )
        .unwrap(),
    )
    .unwrap()
}

/// A strictly increasing grid on `[0, ~len]` with random spacing.
fn random_grid(rng: &mut ChaCha8Rng, n: usize, len: f64) -> Vec<f64> {
    let steps: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = steps.iter().sum();
    let mut grid = Vec::with_capacity(n);
    let mut acc = 0.0;
    grid.push(0.0);
    for s in &steps {
        acc += s / total * len;
        grid.push(acc);
    }
    grid
}

/// Random piecewise-linear profile with values in `[lo, hi]` and a constant
/// tail, monotone in the requested direction.
pub fn monotone_profile(rng: &mut ChaCha8Rng, lo: f64, hi: f64, non_decreasing: bool) -> GridFn {
    let n = rng.gen_range(4..9);
    let len: f64 = rng.gen_range(3.0..8.0);
    let grid = random_grid(rng, n, len);
    let mut incs: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = incs.iter().sum::<f64>().max(1e-9);
    for inc in &mut incs {
        *inc *= (hi - lo) / total;
    }
    let mut values = Vec::with_capacity(n);
    let mut v = lo;
    values.push(v);
    for inc in &incs {
        v += inc;
        values.push(v);
    }
    if !non_decreasing {
        values.reverse();
    }
    let last = *values.last().unwrap();
    GridFn::new(grid, values, Some(TailSpec::Constant { limit: last })).unwrap()
}

/// Random piecewise-linear profile with independent values in `[lo, hi]` and
/// a constant tail.
pub fn wiggly_profile(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFn {
    let n = rng.gen_range(4..9);
    let len: f64 = rng.gen_range(3.0..8.0);
    let grid = random_grid(rng, n, len);
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let last = *values.last().unwrap();
    GridFn::new(grid, values, Some(TailSpec::Constant { limit: last })).unwrap()
}

fn random_kernel(rng: &mut ChaCha8Rng) -> EnvironmentKernel {
    match rng.gen_range(0..3u32) {
        0 => EnvironmentKernel::Total,
        1 => EnvironmentKernel::Above,
        _ => EnvironmentKernel::Window { width: rng.gen_range(0.5..3.0) },
    }
}

/// A crowding response that can only lower the modulated rate.
fn suppressive_modulation(rng: &mut ChaCha8Rng) -> Modulation {
    let response = if rng.gen_bool(0.5) { Response::ExpDecay } else { Response::Hill };
    Modulation::Scale {
        response,
        kernel: random_kernel(rng),
        c: rng.gen_range(0.1..2.0),
    }
}

/// A random rate configuration whose crowding responses all point in the
/// reproduction-suppressing direction, so the net reproduction number is
/// guaranteed not to increase with the density.
///
/// When the growth rate itself is modulated, slowing growth also reshuffles
/// which states an individual visits; the guarantee then additionally needs
/// the births-per-loss profile to favor later states, so this generator uses
/// a non-decreasing birth profile and a non-increasing loss profile in that
/// regime (and unconstrained profiles otherwise).
pub fn monotone_mode_instance(rng: &mut ChaCha8Rng) -> VitalRates {
    let modulate_growth = rng.gen_bool(0.3);
    let beta_base = if modulate_growth {
        let (lo, hi): (f64, f64) = (rng.gen_range(0.0..0.5), rng.gen_range(1.5..3.0));
        monotone_profile(rng, lo, hi, true)
    } else {
        wiggly_profile(rng, 0.0, 2.5)
    };
    let mu_base = if modulate_growth {
        let (lo, hi): (f64, f64) = (rng.gen_range(0.3..0.6), rng.gen_range(1.2..2.2));
        monotone_profile(rng, lo, hi, false)
    } else {
        wiggly_profile(rng, 0.3, 2.0)
    };
    let growth_base = wiggly_profile(rng, 0.5, 1.8);

    let beta_mod = if rng.gen_bool(0.6) { suppressive_modulation(rng) } else { Modulation::None };
    let mu_mod = if rng.gen_bool(0.6) {
        Modulation::Scale {
            response: Response::LinearUp,
            kernel: random_kernel(rng),
            c: rng.gen_range(0.1..2.0),
        }
    } else {
        Modulation::None
    };
    let growth_mod = if modulate_growth { suppressive_modulation(rng) } else { Modulation::None };

    VitalRates::new(
        RateSpec { base: beta_base, modulation: beta_mod },
        RateSpec { base: mu_base, modulation: mu_mod },
        RateSpec { base: growth_base, modulation: growth_mod },
    )
    .unwrap()
}

/// A pointwise-ordered pair of densities, both non-increasing in the state
/// (exponentially decaying profiles, occasionally starting from zero).
pub fn ordered_density_pair(rng: &mut ChaCha8Rng) -> (Density, Density) {
    let rate: f64 = rng.gen_range(0.5..2.5);
    let amp: f64 = rng.gen_range(0.3..1.5);
    let span = (10.0 / rate).max(5.0);
    let n = 500;
    let high = exp_density(amp, rate, span, n);
    if rng.gen_bool(0.2) {
        return (Density::zero(), high);
    }
    let scale = 1.0 / (1.0 + rng.gen_range(0.2..1.5));
    let low_values: Vec<f64> = high.base().values().iter().map(|v| v * scale).collect();
    let low = Density::new(
        GridFn::new(
            high.base().grid().to_vec(),
            low_values,
            Some(TailSpec::ExpDecay { limit: 0.0, rate }),
        )
        .unwrap(),
    )
    .unwrap();
    (low, high)
}
