//! Order properties of the integral functionals, a power-mean inequality
//! check, randomized instance generators, and a seeded property suite.
//!
//! The theorems under test:
//!
//! * **Functional order** — for a non-negative monotone weight `h` and two
//!   integrators `g_low ≤ g_high` (pointwise) that both vanish at the right
//!   endpoint, the functional value at `g_high` is at least the value at
//!   `g_low`: strictly larger when `h` is strictly monotone and the
//!   integrators differ on a set of positive measure, exactly
//!   `h · (g_high(a) - g_low(a))` when `h` is constant.
//! * **Hazard order** — the event-time functional of [`crate::stieltjes::hazard_functional`]
//!   is antitone in the rate: `f_low ≤ f_high` implies `I(f_low) ≥ I(f_high)`
//!   for (weakly) increasing weights.
//! * **Power-mean bound** — for `h ≥ 0` (weakly) increasing, `g ≥ 0`
//!   non-increasing and vanishing at the right endpoint, and `0 < p ≤ 1`:
//!   `∫ h d[-g] ≤ (∫ hᵖ d[-gᵖ])^{1/p}`, with equality at `p = 1` and the
//!   reversed inequality for `p ≥ 1`.
//!
//! Generators draw from three shape families (exponential decay, rational
//! decay, piecewise random) over bounded intervals and half lines, from a
//! counter-based ChaCha stream so every instance is reproducible from
//! `(seed, stream, index)` alone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_fn::{BVFn, Direction, GridFn, Interval, MonotoneFn, TailSpec};
use crate::stieltjes::{
    antitone_functional, hazard_functional, integration_by_parts_residual, monotone_functional,
    QuadratureConfig,
};

/// Pass threshold for order margins: a delta may undershoot zero by at most
/// this before the weak-order property counts as violated.
pub const ORDER_TOL: f64 = 1e-9;

/// Pass threshold for the hazard-order and power-mean margins, which carry
/// quadrature error from the survivor-function and pointwise-power
/// constructions.
pub const INEQUALITY_TOL: f64 = 1e-8;

/// Pass threshold for integration-by-parts residuals on bounded intervals;
/// half-line instances use `10 × tail_tol` instead, since each side carries
/// its own truncation error.
pub const IBP_TOL: f64 = 1e-7;

// ---------------------------------------------------------------------------
// Order checks

/// Result of comparing a functional at two pointwise-ordered integrators.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalOrderCheck {
    /// Functional value at the smaller integrator.
    pub value_low: f64,
    /// Functional value at the larger integrator.
    pub value_high: f64,
    /// `value_high - value_low`; non-negative when the order property holds.
    pub delta: f64,
    /// Whether `g_low ≤ g_high` was confirmed on the merged probe grid.
    pub ordered_input: bool,
}

/// Check that two integrators are pointwise ordered, probing all nodes of
/// both grids, segment midpoints, and a ladder of tail points.
fn verify_pointwise_order(low: &GridFn, high: &GridFn) -> Result<bool> {
    if low.interval().a != high.interval().a || low.interval().is_finite() != high.interval().is_finite() {
        return Err(Error::Precondition(
            "ordered integrators must share a left endpoint and finiteness".into(),
        ));
    }
    let mut probes: Vec<f64> = low.grid().iter().chain(high.grid().iter()).copied().collect();
    probes.sort_by(f64::total_cmp);
    probes.dedup();
    let mids: Vec<f64> = probes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    probes.extend(mids);
    if !low.interval().is_finite() {
        let far = low.last_node().max(high.last_node());
        for k in [0.5, 1.0, 2.0, 5.0, 10.0, 25.0] {
            probes.push(far + k);
        }
        let tol = (low.right_value() - high.right_value()).max(0.0);
        if tol > 1e-12 {
            return Ok(false);
        }
    }
    let end = match (low.interval().b, high.interval().b) {
        (Some(b1), Some(b2)) => Some(b1.min(b2)),
        _ => None,
    };
    for &x in &probes {
        if x < low.interval().a {
            continue;
        }
        if let Some(b) = end {
            if x > b {
                continue;
            }
        }
        if low.eval(x)? > high.eval(x)? + 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluate the order property of the monotone functionals at a pointwise
/// ordered pair of integrators.
///
/// For an upward weight this uses the decay-side functional, for a downward
/// weight the companion; both are (weakly) increasing in the integrator, so
/// `delta ≥ 0` is the expected outcome either way.
pub fn functional_order(
    h: &MonotoneFn,
    g_low: &BVFn,
    g_high: &BVFn,
    cfg: &QuadratureConfig,
) -> Result<FunctionalOrderCheck> {
    let ordered_input = verify_pointwise_order(g_low.base(), g_high.base())?;
    let (lo, hi) = if h.direction().is_upward() {
        (monotone_functional(h, g_low, cfg)?, monotone_functional(h, g_high, cfg)?)
    } else {
        (antitone_functional(h, g_low, cfg)?, antitone_functional(h, g_high, cfg)?)
    };
    Ok(FunctionalOrderCheck {
        value_low: lo.value,
        value_high: hi.value,
        delta: hi.value - lo.value,
        ordered_input,
    })
}

/// Result of comparing the event-time functional at two ordered rates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HazardOrderCheck {
    /// Value at the smaller rate.
    pub value_low_rate: f64,
    /// Value at the larger rate.
    pub value_high_rate: f64,
    /// `value_low_rate - value_high_rate`; non-negative when the antitone
    /// property holds.
    pub delta: f64,
    /// Whether `f_low ≤ f_high` was confirmed on the merged probe grid.
    pub ordered_input: bool,
    /// Whether both rates have divergent mass (the property's hypothesis).
    pub divergent_mass: bool,
}

/// Evaluate the antitone-in-the-rate property of the event-time functional
/// at a pointwise ordered pair of rates.
pub fn hazard_order(
    h: &MonotoneFn,
    f_low: &GridFn,
    f_high: &GridFn,
    cfg: &QuadratureConfig,
) -> Result<HazardOrderCheck> {
    let ordered_input = verify_pointwise_order(f_low, f_high)?;
    let lo = hazard_functional(h, f_low, cfg)?;
    let hi = hazard_functional(h, f_high, cfg)?;
    Ok(HazardOrderCheck {
        value_low_rate: lo.value,
        value_high_rate: hi.value,
        delta: lo.value - hi.value,
        ordered_input,
        divergent_mass: lo.divergent_mass && hi.divergent_mass,
    })
}

// ---------------------------------------------------------------------------
// Power-mean inequality

/// Report of one power-mean inequality evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerMeanReport {
    pub p: f64,
    /// `∫ h d[-g]`.
    pub lhs: f64,
    /// `∫ hᵖ d[-gᵖ]`.
    pub inner: f64,
    /// `inner^{1/p}` — the bound the inequality asserts.
    pub rhs: f64,
    /// `inner^{p}` — the companion scaling, reported for reference only.
    pub rhs_alt: f64,
    /// Signed distance into the valid region: `rhs - lhs` for `p ≤ 1`,
    /// `lhs - rhs` for `p > 1`.
    pub margin: f64,
    /// Whether the (direction-appropriate) inequality holds within
    /// [`INEQUALITY_TOL`].
    pub holds: bool,
    /// `true` when `p > 1`, where the inequality direction flips.
    pub reversed: bool,
}

/// Pointwise power of a represented function, with the tail refit: an
/// exponential tail decaying to zero powers exactly (`rate → p·rate`), a
/// constant tail powers exactly, and a tail relaxing to a non-zero limit is
/// refit through its endpoint value and limit (first-order exact).
fn pointwise_power(f: &GridFn, p: f64) -> Result<GridFn> {
    if f.min_value() < 0.0 {
        return Err(Error::Precondition(format!(
            "pointwise powers need a non-negative function, found minimum {}",
            f.min_value()
        )));
    }
    let values: Vec<f64> = f.values().iter().map(|v| v.powf(p)).collect();
    let tail = f.tail().map(|t| match *t {
        TailSpec::Constant { limit } => TailSpec::Constant { limit: limit.powf(p) },
        TailSpec::ExpDecay { limit, rate } => {
            if limit == 0.0 {
                TailSpec::ExpDecay { limit: 0.0, rate: p * rate }
            } else {
                TailSpec::ExpDecay { limit: limit.powf(p), rate }
            }
        }
    });
    GridFn::new(f.grid().to_vec(), values, tail)
}

/// Evaluate the power-mean inequality
/// `∫ h d[-g] ≤ (∫ hᵖ d[-gᵖ])^{1/p}` for `0 < p ≤ 1` (reversed for `p > 1`)
/// with `h ≥ 0` (weakly) increasing and `g ≥ 0` non-increasing, vanishing at
/// the right endpoint.
///
/// At `p = 1` both sides are the same integral and are reused bit-for-bit,
/// so the reported margin is exactly zero.
pub fn power_mean_check(h: &MonotoneFn, g: &BVFn, p: f64, cfg: &QuadratureConfig) -> Result<PowerMeanReport> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent must be positive and finite, got {p}")));
    }
    if !h.direction().is_upward() {
        return Err(Error::Precondition("weight must be non-decreasing".into()));
    }
    if g.base().min_value() < 0.0 {
        return Err(Error::Precondition("integrator must be non-negative".into()));
    }
    let class = g.base().classify_monotone(crate::grid_fn::STRICT_TOL);
    if !class.map_or(false, |c| c.admits(Direction::NonIncreasing)) {
        return Err(Error::Precondition("integrator must be non-increasing".into()));
    }
    let lhs = monotone_functional(h, g, cfg)?.value;
    if p == 1.0 {
        return Ok(PowerMeanReport {
            p,
            lhs,
            inner: lhs,
            rhs: lhs,
            rhs_alt: lhs,
            margin: 0.0,
            holds: true,
            reversed: false,
        });
    }
    let hp = MonotoneFn::new(pointwise_power(h.base(), p)?, Direction::NonDecreasing)?;
    let gp = BVFn::new(pointwise_power(g.base(), p)?);
    let inner = monotone_functional(&hp, &gp, cfg)?.value;
    let clamped = inner.max(0.0);
    let rhs = clamped.powf(1.0 / p);
    let rhs_alt = clamped.powf(p);
    let reversed = p > 1.0;
    let margin = if reversed { lhs - rhs } else { rhs - lhs };
    Ok(PowerMeanReport { p, lhs, inner, rhs, rhs_alt, margin, holds: margin >= -INEQUALITY_TOL, reversed })
}

// ---------------------------------------------------------------------------
// Instance generators

/// Mix `(seed, stream)` into an independent deterministic RNG. Streams keep
/// the draws of unrelated instance kinds decoupled, so adding draws to one
/// generator does not shift any other.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Shape family of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ExpDecay,
    RationalDecay,
    PiecewiseRandom,
}

impl Family {
    fn pick(rng: &mut ChaCha8Rng) -> Family {
        match rng.gen_range(0..3) {
            0 => Family::ExpDecay,
            1 => Family::RationalDecay,
            _ => Family::PiecewiseRandom,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::ExpDecay => "exp_decay",
            Family::RationalDecay => "rational_decay",
            Family::PiecewiseRandom => "piecewise_random",
        }
    }
}

/// A non-negative integrator from the given family. With `force_vanishing`
/// the right value (or limit) is exactly zero; otherwise bounded instances
/// keep a random right value and half-line instances may relax to a non-zero
/// limit.
pub fn random_integrator(
    rng: &mut ChaCha8Rng,
    family: Family,
    improper: bool,
    force_vanishing: bool,
) -> BVFn {
    let f = match family {
        Family::ExpDecay => {
            let a_amp: f64 = rng.gen_range(0.5..2.0);
            let lam: f64 = rng.gen_range(0.4..1.5);
            if improper {
                let x_max = (a_amp / 1e-10).ln() / lam;
                let n = rng.gen_range(80..200);
                let mut w = 1.0_f64;
                let mut grid = Vec::with_capacity(n);
                let mut values = Vec::with_capacity(n);
                for i in 0..n {
                    let x = x_max * i as f64 / (n - 1) as f64;
                    grid.push(x);
                    values.push(a_amp * (-lam * x).exp() * w);
                    w = (w + rng.gen_range(-0.12..0.12)).clamp(0.7, 1.3);
                }
                GridFn::new(grid, values, Some(TailSpec::ExpDecay { limit: 0.0, rate: lam })).unwrap()
            } else {
                let l: f64 = rng.gen_range(2.0..6.0);
                let n = rng.gen_range(40..120);
                let mut grid = Vec::with_capacity(n);
                let mut values = Vec::with_capacity(n);
                for i in 0..n {
                    let x = l * i as f64 / (n - 1) as f64;
                    let mut v = a_amp * (-lam * x).exp();
                    if force_vanishing {
                        v *= 1.0 - x / l;
                    }
                    grid.push(x);
                    values.push(v);
                }
                GridFn::new(grid, values, None).unwrap()
            }
        }
        Family::RationalDecay => {
            let a_amp: f64 = rng.gen_range(0.5..2.0);
            let k: f64 = rng.gen_range(1.5..3.0);
            if improper {
                let x_max: f64 = rng.gen_range(20.0..40.0);
                let n = rng.gen_range(80..200);
                let grid: Vec<f64> = (0..n).map(|i| x_max * i as f64 / (n - 1) as f64).collect();
                let values: Vec<f64> = grid.iter().map(|&x| a_amp / (1.0 + x).powf(k)).collect();
                let rate = k / (1.0 + x_max);
                GridFn::new(grid, values, Some(TailSpec::ExpDecay { limit: 0.0, rate })).unwrap()
            } else {
                let l: f64 = rng.gen_range(2.0..6.0);
                let n = rng.gen_range(40..120);
                let grid: Vec<f64> = (0..n).map(|i| l * i as f64 / (n - 1) as f64).collect();
                let floor = if force_vanishing { a_amp / (1.0 + l).powf(k) } else { 0.0 };
                let values: Vec<f64> = grid.iter().map(|&x| a_amp / (1.0 + x).powf(k) - floor).collect();
                GridFn::new(grid, values, None).unwrap()
            }
        }
        Family::PiecewiseRandom => {
            let n = rng.gen_range(10..40);
            let l: f64 = rng.gen_range(3.0..8.0);
            let mut grid: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..l)).collect();
            grid[0] = 0.0;
            grid.sort_by(f64::total_cmp);
            grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            if grid.len() < 2 {
                grid = vec![0.0, l];
            }
            let mut values = Vec::with_capacity(grid.len());
            let mut v: f64 = rng.gen_range(0.3..1.5);
            for _ in &grid {
                values.push(v);
                v = (v + rng.gen_range(-0.4..0.4)).abs();
            }
            if improper {
                let rate: f64 = rng.gen_range(0.5..2.0);
                let limit: f64 = if force_vanishing || rng.gen_bool(0.67) {
                    0.0
                } else {
                    rng.gen_range(0.0..0.3)
                };
                let last = *values.last().unwrap();
                let limit = limit.min(last);
                GridFn::new(grid, values, Some(TailSpec::ExpDecay { limit, rate })).unwrap()
            } else {
                if force_vanishing {
                    *values.last_mut().unwrap() = 0.0;
                }
                GridFn::new(grid, values, None).unwrap()
            }
        }
    };
    BVFn::new(f)
}

/// A pointwise-ordered pair of non-negative integrators, both vanishing at
/// the right endpoint, built either by scaling down or by adding a
/// non-negative interior bump.
pub fn ordered_integrators(rng: &mut ChaCha8Rng, family: Family, improper: bool) -> (BVFn, BVFn) {
    let high = random_integrator(rng, family, improper, true);
    if rng.gen_bool(0.5) {
        let s: f64 = rng.gen_range(0.3..0.9);
        let low_values: Vec<f64> = high.base().values().iter().map(|v| s * v).collect();
        let low = GridFn::new(high.base().grid().to_vec(), low_values, high.base().tail().copied()).unwrap();
        (BVFn::new(low), high)
    } else {
        // Bump the larger function up on an interior window [p, r]; outside
        // the window (and in the tail) the two functions coincide.
        let low = high;
        let base = low.base();
        let last = base.last_node();
        let p: f64 = rng.gen_range(0.0..0.6 * last);
        let r: f64 = rng.gen_range(p + 0.2 * last..last);
        let q = 0.5 * (p + r);
        let amp: f64 = rng.gen_range(0.1..0.6);
        let hat = move |x: f64| {
            if x <= p || x >= r {
                0.0
            } else if x <= q {
                amp * (x - p) / (q - p)
            } else {
                amp * (r - x) / (r - q)
            }
        };
        let mut grid: Vec<f64> = base.grid().to_vec();
        grid.extend_from_slice(&[p, q, r]);
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let values: Vec<f64> = grid.iter().map(|&x| base.eval(x).unwrap() + hat(x)).collect();
        let high = GridFn::new(grid, values, base.tail().copied()).unwrap();
        (low, BVFn::new(high))
    }
}

/// A non-negative monotone weight covering `iv` (pass the integrator's
/// interval so bounded instances line up). `upward` picks the direction,
/// `strict` requests strictly monotone increments (certified by
/// construction).
pub fn random_weight(rng: &mut ChaCha8Rng, iv: Interval, upward: bool, strict: bool) -> MonotoneFn {
    let offset: f64 = if rng.gen_bool(0.33) { 0.0 } else { rng.gen_range(0.1..0.8) };
    let dir = match (upward, strict) {
        (true, true) => Direction::Increasing,
        (true, false) => Direction::NonDecreasing,
        (false, true) => Direction::Decreasing,
        (false, false) => Direction::NonIncreasing,
    };
    match iv.b {
        None => {
            let amp: f64 = rng.gen_range(0.5..2.0);
            let c: f64 = rng.gen_range(0.3..1.5);
            let x_max = iv.a + 10.0 / c;
            let n = rng.gen_range(60..160);
            let grid: Vec<f64> = (0..n).map(|i| iv.a + (x_max - iv.a) * i as f64 / (n - 1) as f64).collect();
            let (values, tail): (Vec<f64>, TailSpec) = if upward {
                (
                    grid.iter().map(|&x| offset + amp * (1.0 - (-c * (x - iv.a)).exp())).collect(),
                    TailSpec::ExpDecay { limit: offset + amp, rate: c },
                )
            } else {
                (
                    grid.iter().map(|&x| offset + amp * (-c * (x - iv.a)).exp()).collect(),
                    TailSpec::ExpDecay { limit: offset, rate: c },
                )
            };
            MonotoneFn::new(GridFn::new(grid, values, Some(tail)).unwrap(), dir).unwrap()
        }
        Some(b) => {
            let n = rng.gen_range(10..50);
            let grid: Vec<f64> = (0..n)
                .map(|i| if i + 1 == n { b } else { iv.a + (b - iv.a) * i as f64 / (n - 1) as f64 })
                .collect();
            let mut values = Vec::with_capacity(n);
            let mut v = offset;
            for _ in 0..n {
                values.push(v);
                v += if strict { rng.gen_range(0.02..0.5) } else { rng.gen_range(0.0..0.5) };
            }
            if !upward {
                values.reverse();
            }
            MonotoneFn::new(GridFn::new(grid, values, None).unwrap(), dir).unwrap()
        }
    }
}

/// A constant weight on the given interval; returns the constant too.
pub fn constant_weight(rng: &mut ChaCha8Rng, iv: Interval) -> (MonotoneFn, f64) {
    let c: f64 = rng.gen_range(0.2..3.0);
    (
        MonotoneFn::new(GridFn::constant(c, iv.a, iv.b).unwrap(), Direction::NonDecreasing).unwrap(),
        c,
    )
}

/// A pointwise-ordered pair of non-negative rates with divergent mass:
/// `f_high` exceeds `f_low` by a constant or by an exponentially decaying
/// bump, and both level off to strictly positive constants.
pub fn ordered_rates(rng: &mut ChaCha8Rng) -> (GridFn, GridFn) {
    let n = rng.gen_range(15..40);
    let x_max: f64 = rng.gen_range(3.0..8.0);
    let grid: Vec<f64> = (0..n).map(|i| x_max * i as f64 / (n - 1) as f64).collect();
    let mut values = Vec::with_capacity(n);
    let mut v: f64 = rng.gen_range(0.4..2.0);
    for _ in 0..n {
        values.push(v);
        v = (v + rng.gen_range(-0.3..0.3)).clamp(0.2, 3.0);
    }
    let last = *values.last().unwrap();
    let low = GridFn::new(grid.clone(), values.clone(), Some(TailSpec::Constant { limit: last })).unwrap();
    let high = if rng.gen_bool(0.5) {
        let d: f64 = rng.gen_range(0.1..1.0);
        let hv: Vec<f64> = values.iter().map(|v| v + d).collect();
        GridFn::new(grid, hv, Some(TailSpec::Constant { limit: last + d })).unwrap()
    } else {
        let amp: f64 = rng.gen_range(0.2..1.0);
        let r: f64 = rng.gen_range(0.5..2.0);
        let hv: Vec<f64> = grid.iter().zip(&values).map(|(&x, v)| v + amp * (-r * x).exp()).collect();
        GridFn::new(grid, hv, Some(TailSpec::ExpDecay { limit: last, rate: r })).unwrap()
    };
    (low, high)
}

/// A weight/integrator pair for the power-mean inequality: `h ≥ 0`
/// increasing (sampled on a grid graded toward the left endpoint, where
/// fractional powers have a root-type corner), `g ≥ 0` non-increasing and
/// vanishing at the right endpoint.
pub fn power_mean_instance(rng: &mut ChaCha8Rng, improper: bool) -> (MonotoneFn, BVFn) {
    let offset: f64 = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.1..0.5) };
    let amp: f64 = rng.gen_range(0.5..2.0);
    let c: f64 = rng.gen_range(0.4..1.5);
    let b_amp: f64 = rng.gen_range(0.5..2.0);
    let lam: f64 = rng.gen_range(0.4..1.5);
    if improper {
        let x_h = 12.0 / c;
        let h = MonotoneFn::new(
            GridFn::sample_graded(
                |x| offset + amp * (1.0 - (-c * x).exp()),
                0.0,
                x_h,
                400,
                2.0,
                Some(TailSpec::ExpDecay { limit: offset + amp, rate: c }),
            )
            .unwrap(),
            Direction::NonDecreasing,
        )
        .unwrap();
        let x_g = (b_amp / 1e-12).ln() / lam;
        let g = BVFn::new(
            GridFn::sample(
                |x| b_amp * (-lam * x).exp(),
                0.0,
                x_g,
                600,
                Some(TailSpec::ExpDecay { limit: 0.0, rate: lam }),
            )
            .unwrap(),
        );
        (h, g)
    } else {
        let l: f64 = rng.gen_range(2.0..5.0);
        let h = MonotoneFn::new(
            GridFn::sample_graded(|x| offset + amp * (1.0 - (-c * x).exp()), 0.0, l, 300, 2.0, None)
                .unwrap(),
            Direction::NonDecreasing,
        )
        .unwrap();
        let k: f64 = rng.gen_range(1.0..3.0);
        let g = BVFn::new(
            GridFn::sample(|x| b_amp * (1.0 - x / l).powf(k), 0.0, l, 400, None).unwrap(),
        );
        (h, g)
    }
}

// ---------------------------------------------------------------------------
// Property suite

/// One evaluated property instance.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteRow {
    pub index: usize,
    pub property: String,
    pub family: String,
    /// Signed distance into the valid region (≥ 0 means the property held
    /// with room to spare); see each property's documentation for the exact
    /// definition.
    pub margin: f64,
    pub pass: bool,
}

/// Outcome of a full suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub n_pass: usize,
    pub n_fail: usize,
    pub all_pass: bool,
}

/// Adjustments applied to every margin before the pass decision — used to
/// exercise failure reporting deterministically.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteOptions {
    /// Subtracted from every margin. Zero in normal operation.
    pub margin_bias: f64,
}

const STREAM_IBP: u64 = 1;
const STREAM_ORDER: u64 = 2;
const STREAM_HAZARD: u64 = 3;
const STREAM_POWER_MEAN: u64 = 4;

/// Run `n` instances of each randomized property check and collect one row
/// per instance. Margins:
///
/// * `ibp_residual` — allowed residual minus observed residual, where the
///   allowance is [`IBP_TOL`] on bounded intervals and `10 × tail_tol` on
///   half lines.
/// * `functional_order_strict` — the functional delta itself (must be > 0).
/// * `functional_order_constant` — `ORDER_TOL` minus the deviation of the
///   delta from its exact closed form `c · (g_high(a) - g_low(a))`.
/// * `hazard_order` — the functional delta plus [`INEQUALITY_TOL`].
/// * `power_mean` — the inequality margin plus [`INEQUALITY_TOL`].
///
/// Every instance is reproducible from `(seed, index)`.
pub fn run_property_suite(
    n: usize,
    seed: u64,
    cfg: &QuadratureConfig,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    let mut rows = Vec::with_capacity(5 * n);
    let bias = opts.margin_bias;

    for i in 0..n {
        let mut rng = seeded_rng(seed, STREAM_IBP.wrapping_mul(0x1_0000).wrapping_add(i as u64));
        let family = Family::pick(&mut rng);
        let improper = i % 2 == 0;
        let upward = rng.gen_bool(0.5);
        let strict = rng.gen_bool(0.5);
        let g = random_integrator(&mut rng, family, improper, false);
        let iv = g.interval();
        let h = random_weight(&mut rng, iv, upward, strict);
        let r = integration_by_parts_residual(&h, &g, iv, cfg)?;
        let allowed = if improper { 10.0 * cfg.tail_tol } else { IBP_TOL };
        let margin = allowed - r.residual - bias;
        rows.push(SuiteRow {
            index: i,
            property: "ibp_residual".into(),
            family: family.name().into(),
            margin,
            pass: margin >= 0.0,
        });
    }

    for i in 0..n {
        let mut rng = seeded_rng(seed, STREAM_ORDER.wrapping_mul(0x1_0000).wrapping_add(i as u64));
        let family = Family::pick(&mut rng);
        let improper = i % 2 == 0;
        let strict_case = i % 4 < 2;
        if strict_case {
            let (lo, hi) = ordered_integrators(&mut rng, family, improper);
            let h = random_weight(&mut rng, hi.interval(), true, true);
            let check = functional_order(&h, &lo, &hi, cfg)?;
            let margin = check.delta - bias;
            rows.push(SuiteRow {
                index: i,
                property: "functional_order_strict".into(),
                family: family.name().into(),
                margin,
                pass: check.ordered_input && margin > 0.0,
            });
        } else {
            let (lo, hi) = ordered_integrators(&mut rng, family, improper);
            let (h, c) = constant_weight(&mut rng, hi.interval());
            let check = functional_order(&h, &lo, &hi, cfg)?;
            let expected = c * (hi.eval(hi.interval().a)? - lo.eval(lo.interval().a)?);
            let margin = ORDER_TOL - (check.delta - expected).abs() - bias;
            rows.push(SuiteRow {
                index: i,
                property: "functional_order_constant".into(),
                family: family.name().into(),
                margin,
                pass: check.ordered_input && margin >= 0.0,
            });
        }
    }

    for i in 0..n {
        let mut rng = seeded_rng(seed, STREAM_HAZARD.wrapping_mul(0x1_0000).wrapping_add(i as u64));
        let h = random_weight(&mut rng, Interval::half_line(0.0), true, false);
        let (lo, hi) = ordered_rates(&mut rng);
        let check = hazard_order(&h, &lo, &hi, cfg)?;
        let margin = check.delta + INEQUALITY_TOL - bias;
        rows.push(SuiteRow {
            index: i,
            property: "hazard_order".into(),
            family: "piecewise_random".into(),
            margin,
            pass: check.ordered_input && check.divergent_mass && margin >= 0.0,
        });
    }

    for i in 0..n {
        let mut rng = seeded_rng(seed, STREAM_POWER_MEAN.wrapping_mul(0x1_0000).wrapping_add(i as u64));
        let improper = i % 2 == 0;
        let p = [0.25, 0.5, 0.75, 1.0][i % 4];
        let (h, g) = power_mean_instance(&mut rng, improper);
        let report = power_mean_check(&h, &g, p, cfg)?;
        let margin = report.margin + INEQUALITY_TOL - bias;
        rows.push(SuiteRow {
            index: i,
            property: "power_mean".into(),
            family: "exp_decay".into(),
            margin,
            pass: margin >= 0.0,
        });
    }

    let n_pass = rows.iter().filter(|r| r.pass).count();
    let n_fail = rows.len() - n_pass;
    Ok(SuiteReport { all_pass: n_fail == 0, n_pass, n_fail, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn generated_pairs_are_pointwise_ordered() {
        for seed in 0..30u64 {
            let mut rng = seeded_rng(seed, 99);
            let family = Family::pick(&mut rng);
            let improper = seed % 2 == 0;
            let (lo, hi) = ordered_integrators(&mut rng, family, improper);
            assert!(verify_pointwise_order(lo.base(), hi.base()).unwrap(), "seed {seed}");
            assert!(lo.in_set_a() && hi.in_set_a(), "seed {seed}");
        }
    }

    #[test]
    fn generated_rates_are_pointwise_ordered_and_divergent() {
        for seed in 0..30u64 {
            let mut rng = seeded_rng(seed, 98);
            let (lo, hi) = ordered_rates(&mut rng);
            assert!(verify_pointwise_order(&lo, &hi).unwrap(), "seed {seed}");
            assert!(lo.tail().unwrap().limit() > 0.0);
            assert!(hi.tail().unwrap().limit() > 0.0);
            assert!(lo.min_value() >= 0.0);
        }
    }

    #[test]
    fn order_check_reports_positive_delta_for_strict_weights() {
        for seed in 0..20u64 {
            let mut rng = seeded_rng(seed, 97);
            let improper = seed % 2 == 0;
            let (lo, hi) = ordered_integrators(&mut rng, Family::ExpDecay, improper);
            let h = random_weight(&mut rng, hi.interval(), true, true);
            let check = functional_order(&h, &lo, &hi, &cfg()).unwrap();
            assert!(check.ordered_input);
            assert!(check.delta > 0.0, "seed {seed}: delta {}", check.delta);
        }
    }

    #[test]
    fn order_check_constant_weight_matches_closed_form() {
        for seed in 0..20u64 {
            let mut rng = seeded_rng(seed, 96);
            let improper = seed % 2 == 0;
            let (lo, hi) = ordered_integrators(&mut rng, Family::PiecewiseRandom, improper);
            let (h, c) = constant_weight(&mut rng, hi.interval());
            let check = functional_order(&h, &lo, &hi, &cfg()).unwrap();
            let expected = c * (hi.eval(0.0).unwrap() - lo.eval(0.0).unwrap());
            assert_abs_diff_eq!(check.delta, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn order_check_flags_unordered_inputs() {
        let mut rng = seeded_rng(5, 95);
        let (lo, hi) = ordered_integrators(&mut rng, Family::ExpDecay, false);
        let h = random_weight(&mut rng, hi.interval(), true, true);
        // Swap: the "high" argument is now pointwise below the "low" one.
        let check = functional_order(&h, &hi, &lo, &cfg()).unwrap();
        assert!(!check.ordered_input);
    }

    #[test]
    fn hazard_order_constant_rates_closed_form() {
        // f ≡ 1 vs f ≡ 2 with h = 1 - e^{-x}: values 1/2 and 1/3.
        let h = MonotoneFn::new(
            GridFn::sample(
                |x| 1.0 - (-x).exp(),
                0.0,
                40.0,
                20_001,
                Some(TailSpec::ExpDecay { limit: 1.0, rate: 1.0 }),
            )
            .unwrap(),
            Direction::NonDecreasing,
        )
        .unwrap();
        let f1 = GridFn::constant(1.0, 0.0, None).unwrap();
        let f2 = GridFn::constant(2.0, 0.0, None).unwrap();
        let fine = QuadratureConfig { panel_points: 4097, ..cfg() };
        let check = hazard_order(&h, &f1, &f2, &fine).unwrap();
        assert!(check.ordered_input && check.divergent_mass);
        assert_abs_diff_eq!(check.value_low_rate, 0.5, epsilon = 1e-5);
        assert_abs_diff_eq!(check.value_high_rate, 1.0 / 3.0, epsilon = 1e-5);
        assert!(check.delta > 0.1);
    }

    #[test]
    fn generated_hazard_instances_satisfy_the_order() {
        for seed in 0..15u64 {
            let mut rng = seeded_rng(seed, 94);
            let h = random_weight(&mut rng, Interval::half_line(0.0), true, false);
            let (lo, hi) = ordered_rates(&mut rng);
            let check = hazard_order(&h, &lo, &hi, &cfg()).unwrap();
            assert!(check.delta >= -INEQUALITY_TOL, "seed {seed}: delta {}", check.delta);
        }
    }

    #[test]
    fn power_mean_known_value() {
        // h = x, g = e^{-x}, p = 1/2: lhs = 1, inner = √(π/2), rhs = π/2.
        // The linear weight is unbounded, so it is represented with a plateau
        // far beyond the truncation point the integrals reach.
        let plateau = 60.0;
        let h = MonotoneFn::new(
            GridFn::sample_graded(
                |x| x,
                0.0,
                plateau,
                4_001,
                2.0,
                Some(TailSpec::Constant { limit: plateau }),
            )
            .unwrap(),
            Direction::NonDecreasing,
        )
        .unwrap();
        let g = BVFn::new(
            GridFn::sample(
                |x| (-x).exp(),
                0.0,
                plateau,
                6_001,
                Some(TailSpec::ExpDecay { limit: 0.0, rate: 1.0 }),
            )
            .unwrap(),
        );
        let report = power_mean_check(&h, &g, 0.5, &cfg()).unwrap();
        assert_abs_diff_eq!(report.lhs, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(report.inner, (std::f64::consts::PI / 2.0).sqrt(), epsilon = 1e-4);
        assert_abs_diff_eq!(report.rhs, std::f64::consts::PI / 2.0, epsilon = 2e-4);
        assert!(report.holds && !report.reversed);
        assert!(report.margin > 0.5);

        // p = 2 flips the direction: inner = ∫ x² d[-e^{-2x}] = 1/2.
        let report2 = power_mean_check(&h, &g, 2.0, &cfg()).unwrap();
        assert!(report2.reversed);
        assert_abs_diff_eq!(report2.inner, 0.5, epsilon = 1e-3);
        assert!(report2.holds, "margin {}", report2.margin);
        assert!(report2.margin > 0.2);
    }

    #[test]
    fn power_mean_is_exact_equality_at_p_one() {
        let mut rng = seeded_rng(11, 93);
        let (h, g) = power_mean_instance(&mut rng, true);
        let report = power_mean_check(&h, &g, 1.0, &cfg()).unwrap();
        assert_eq!(report.margin, 0.0);
        assert_eq!(report.lhs, report.rhs);
        assert!(report.holds);
    }

    #[test]
    fn power_mean_rejects_bad_inputs() {
        let mut rng = seeded_rng(3, 92);
        let (h, g) = power_mean_instance(&mut rng, false);
        assert!(power_mean_check(&h, &g, 0.0, &cfg()).is_err());
        assert!(power_mean_check(&h, &g, -1.0, &cfg()).is_err());
        // A non-monotone integrator is rejected.
        let wiggle = BVFn::new(
            GridFn::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.2, 0.0], None).unwrap(),
        );
        assert!(power_mean_check(&h, &wiggle, 0.5, &cfg()).is_ok());
        let non_monotone = BVFn::new(
            GridFn::new(vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 0.0], None).unwrap(),
        );
        assert!(matches!(
            power_mean_check(&h, &non_monotone, 0.5, &cfg()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pointwise_power_refits_pure_decay_exactly() {
        let g = GridFn::sample(
            |x| (-x).exp(),
            0.0,
            10.0,
            101,
            Some(TailSpec::ExpDecay { limit: 0.0, rate: 1.0 }),
        )
        .unwrap();
        let gp = pointwise_power(&g, 0.5).unwrap();
        // Node values are the exact pointwise square roots and the tail rate
        // halves, so deep-tail evaluations match e^{-x/2} exactly.
        assert_abs_diff_eq!(gp.eval(30.0).unwrap(), (-15.0_f64).exp(), epsilon = 1e-20);
        match gp.tail().unwrap() {
            TailSpec::ExpDecay { limit, rate } => {
                assert_eq!(*limit, 0.0);
                assert_abs_diff_eq!(*rate, 0.5);
            }
            other => panic!("unexpected tail {other:?}"),
        }
    }

    #[test]
    fn suite_is_deterministic_and_passes() {
        let report1 = run_property_suite(8, 42, &cfg(), &SuiteOptions::default()).unwrap();
        let report2 = run_property_suite(8, 42, &cfg(), &SuiteOptions::default()).unwrap();
        assert_eq!(report1.rows, report2.rows);
        assert!(report1.all_pass, "failures: {:?}", report1.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>());
        assert_eq!(report1.rows.len(), 4 * 8);

        let report3 = run_property_suite(8, 43, &cfg(), &SuiteOptions::default()).unwrap();
        assert_ne!(report1.rows, report3.rows);
    }

    #[test]
    fn suite_bias_forces_failures() {
        let report = run_property_suite(4, 42, &cfg(), &SuiteOptions { margin_bias: 1e9 }).unwrap();
        assert!(!report.all_pass);
        assert_eq!(report.n_pass, 0);
    }
}
