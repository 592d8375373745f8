//! Structured-population dynamics over a size-like state: density-dependent
//! vital rates, survival profiles, net reproduction, and a stationary-state
//! solver.
//!
//! The population state is a density `u ≥ 0` on `[0, ∞)` ([`Density`]). Vital
//! rates — births `β`, losses `μ`, growth speed `g` ([`VitalRates`]) — may
//! respond to crowding through an environment value `E(x; u)`, an aggregate of
//! the density seen from state `x` ([`EnvironmentKernel`]). An individual that
//! enters at state `0` and is transported at speed `g` while exposed to losses
//! `μ` occupies state `x` for a sojourn density
//!
//! ```text
//! Π(x, u) = (1 / g(x, u)) · exp(−∫₀ˣ μ(s, u) / g(s, u) ds).
//! ```
//!
//! The net reproduction number `R(u) = ∫ β(·, u) Π(·, u) dx` counts expected
//! offspring per newborn while the environment is frozen at `u`; a stationary
//! population solves `u = G(u) · Π(·, u)` with newborn flux `G(u) = ∫ β(·, u) u`.
//! [`Model::solve_equilibrium`] locates the flux `B` with `R(u_B) = 1` by
//! bisection over damped fixed-point solves, and [`Model::threshold_report`]
//! classifies the extinct state by comparing `R(0)` with `1`: above the
//! threshold a nontrivial stationary state is expected, and below it one is
//! ruled out provided every rate responds to crowding in the direction that
//! suppresses reproduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_fn::{GridFn, TailSpec};
use crate::stieltjes::{
    abs_tail_exp, int_product_dx, int_product_to_inf, l1_distance, product_integral,
};

/// Slack allowed when requiring the net reproduction number not to increase
/// under a pointwise increase of the density.
pub const REPRODUCTION_ORDER_TOL: f64 = 1e-8;

/// Hazard integrals deeper than this are cut off: `exp(-700)` is already at
/// the edge of the normal floating-point range.
const MAX_HAZARD_DEPTH: f64 = 700.0;

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

/// Discretization and tolerance knobs for the population operations.
///
/// All fields have serde defaults, so a JSON value of `{}` is a valid
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Number of nodes of the uniform model grid carrying hazards, survival
    /// profiles, and solver iterates.
    pub model_points: usize,
    /// Number of hazard e-foldings the model window must contain; the window
    /// ends at `efoldings / min hazard`, so the survival profile decays to
    /// roughly `exp(-efoldings)` before the fitted tail takes over.
    pub efoldings: f64,
    /// Hard cap on the model window.
    pub max_domain: f64,
    /// Acceptance band around 1 for the net reproduction number at a solved
    /// stationary state.
    pub tol_r: f64,
    /// L¹ change between consecutive damped iterates below which the inner
    /// fixed point counts as converged.
    pub tol_inner: f64,
    /// Acceptance level for the stationary residual `‖u − G(u)Π(·,u)‖₁`.
    pub tol_fix: f64,
    /// Iteration budget of the inner fixed point.
    pub max_inner: usize,
    /// The outer bisection stops once the flux bracket is narrower than this.
    pub bracket_tol: f64,
    /// Damping factor `d` of the inner update `u ← (1−d)·u + d·B·Π(·,u)`.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            model_points: 40_000,
            efoldings: 50.0,
            max_domain: 1e6,
            tol_r: 1e-6,
            tol_inner: 1e-8,
            tol_fix: 1e-6,
            max_inner: 500,
            bracket_tol: 1e-8,
            damping: 0.5,
        }
    }
}

impl SolverConfig {
    /// Rejects configurations that would make the discretization or the
    /// solvers meaningless.
    pub fn validate(&self) -> Result<()> {
        if self.model_points < 16 {
            return Err(Error::InvalidConfig(format!(
                "model_points must be at least 16, got {}",
                self.model_points
            )));
        }
        for (name, v) in [
            ("efoldings", self.efoldings),
            ("max_domain", self.max_domain),
            ("tol_r", self.tol_r),
            ("tol_inner", self.tol_inner),
            ("tol_fix", self.tol_fix),
            ("bracket_tol", self.bracket_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.max_inner == 0 {
            return Err(Error::InvalidConfig("max_inner must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// A nonnegative population density on `[0, ∞)` with finite mass.
///
/// The grid must start at `0` and the tail limit must be `0`, so the total
/// mass — the exact integral of the piecewise-linear body plus the closed-form
/// tail mass — is finite. The total and the cumulative masses at the nodes are
/// cached at construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GridFn", into = "GridFn")]
pub struct Density {
    base: GridFn,
    total: f64,
    cum: Vec<f64>,
}

impl TryFrom<GridFn> for Density {
    type Error = Error;
    fn try_from(base: GridFn) -> Result<Density> {
        Density::new(base)
    }
}

impl From<Density> for GridFn {
    fn from(d: Density) -> GridFn {
        d.base
    }
}

impl Density {
    /// Validates the representation and caches its mass profile.
    pub fn new(base: GridFn) -> Result<Self> {
        let iv = base.interval();
        if iv.a != 0.0 {
            return Err(Error::Domain(format!(
                "a density lives on [0, ∞); the grid must start at 0, got {}",
                iv.a
            )));
        }
        let tail = base.tail().ok_or_else(|| {
            Error::InvalidFunction(
                "a density needs a declared tail beyond its last node".into(),
            )
        })?;
        let limit = match *tail {
            TailSpec::Constant { limit } => limit,
            TailSpec::ExpDecay { limit, .. } => limit,
        };
        if limit != 0.0 {
            return Err(Error::InvalidFunction(format!(
                "a density must vanish at infinity; its tail limit is {limit}"
            )));
        }
        if base.min_value() < 0.0 {
            return Err(Error::InvalidFunction(
                "a density must be nonnegative everywhere".into(),
            ));
        }
        let (grid, vals) = (base.grid(), base.values());
        let mut cum = Vec::with_capacity(grid.len());
        cum.push(0.0);
        for i in 1..grid.len() {
            cum.push(cum[i - 1] + 0.5 * (vals[i - 1] + vals[i]) * (grid[i] - grid[i - 1]));
        }
        let tail_mass = match base.tail() {
            Some(TailSpec::ExpDecay { rate, .. }) => vals.last().unwrap() / rate,
            _ => 0.0,
        };
        let total = cum.last().unwrap() + tail_mass;
        if !total.is_finite() {
            return Err(Error::InvalidFunction("density mass is not finite".into()));
        }
        Ok(Density { base, total, cum })
    }

    /// The density with no individuals at all.
    pub fn zero() -> Self {
        Density::new(GridFn::constant(0.0, 0.0, None).expect("constant zero grid"))
            .expect("the zero density is valid")
    }

    /// The underlying function representation.
    pub fn base(&self) -> &GridFn {
        &self.base
    }

    /// Total mass `∫₀^∞ u`, exact for the representation.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Pointwise value `u(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.base.eval(x)
    }

    /// Cumulative mass `M(x) = ∫₀ˣ u`, exact for the representation.
    pub fn cumulative_mass(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!("mass query needs x ≥ 0, got {x}")));
        }
        let grid = self.base.grid();
        let vals = self.base.values();
        let last = *grid.last().unwrap();
        if x >= last {
            let body = *self.cum.last().unwrap();
            return Ok(match self.base.tail() {
                Some(TailSpec::ExpDecay { rate, .. }) => {
                    let v = *vals.last().unwrap();
                    body + v / rate * (1.0 - (-rate * (x - last)).exp())
                }
                _ => body,
            });
        }
        let k = grid.partition_point(|&g| g <= x).saturating_sub(1);
        let s = x - grid[k];
        let slope = (vals[k + 1] - vals[k]) / (grid[k + 1] - grid[k]);
        Ok(self.cum[k] + vals[k] * s + 0.5 * slope * s * s)
    }

    /// Mass at or beyond `x`: `total − M(x)`, clamped at zero against
    /// round-off.
    pub fn mass_beyond(&self, x: f64) -> Result<f64> {
        Ok((self.total - self.cumulative_mass(x)?).max(0.0))
    }
}

// ---------------------------------------------------------------------------
// Environment kernels and rate modulation
// ---------------------------------------------------------------------------

/// How the environment value `E(x; u) = ∫ w(x, y) u(y) dy` aggregates the
/// density seen from state `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentKernel {
    /// `w ≡ 1`: everyone contributes, `E = ∫ u`.
    Total,
    /// `w(x, y) = 1` for `y ∈ [x, x + width)`: a look-ahead window,
    /// `E = M(x + width) − M(x)`.
    Window { width: f64 },
    /// `w(x, y) = 1` for `y ≥ x`: only larger states contribute,
    /// `E = ∫ₓ^∞ u`.
    Above,
    /// `w(x, y) = profile(y − x)` for `y ≥ x`: a custom relative-offset
    /// weight. A profile without a tail counts nothing beyond its last node.
    Custom { profile: GridFn },
}

impl EnvironmentKernel {
    fn validate(&self) -> Result<()> {
        match self {
            EnvironmentKernel::Total | EnvironmentKernel::Above => Ok(()),
            EnvironmentKernel::Window { width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "window width must be positive and finite, got {width}"
                    )));
                }
                Ok(())
            }
            EnvironmentKernel::Custom { profile } => {
                if profile.interval().a != 0.0 {
                    return Err(Error::InvalidFunction(
                        "a custom kernel profile is an offset weight and must start at 0".into(),
                    ));
                }
                if profile.min_value() < 0.0 {
                    return Err(Error::InvalidFunction(
                        "a custom kernel profile must be nonnegative".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The environment value `E(x; u)`, exact for the representations.
    pub fn environment(&self, u: &Density, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!(
                "environment query needs x ≥ 0, got {x}"
            )));
        }
        match self {
            EnvironmentKernel::Total => Ok(u.total()),
            EnvironmentKernel::Window { width } => {
                Ok((u.cumulative_mass(x + width)? - u.cumulative_mass(x)?).max(0.0))
            }
            EnvironmentKernel::Above => u.mass_beyond(x),
            EnvironmentKernel::Custom { profile } => convolved_environment(profile, u, x),
        }
    }

    /// Upper bound on the kernel weight, used for conservative hazard bounds.
    fn sup_weight(&self) -> f64 {
        match self {
            EnvironmentKernel::Custom { profile } => profile.sup_abs(),
            _ => 1.0,
        }
    }
}

/// `∫ₓ^∞ profile(y − x) u(y) dy` by exact piece-pair integration on the merged
/// breakpoints, with a closed-form tail when the profile extends to infinity.
fn convolved_environment(profile: &GridFn, u: &Density, x: f64) -> Result<f64> {
    let ub = u.base();
    let p_end = x + profile.last_node();
    let infinite = profile.tail().is_some();
    let upper = if infinite { p_end.max(ub.last_node()) } else { p_end };
    if upper <= x {
        return Ok(0.0);
    }
    let mut pts = vec![x];
    for &pn in profile.grid() {
        let y = x + pn;
        if y > x && y < upper {
            pts.push(y);
        }
    }
    for &un in ub.grid() {
        if un > x && un < upper {
            pts.push(un);
        }
    }
    pts.push(upper);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let (s, t) = (w[0], w[1]);
        if t > s {
            let pp = profile.piece_on(s - x, t - x).shift(x);
            let uq = ub.piece_on(s, t);
            acc += int_product_dx(&pp, &uq, s, t);
        }
    }
    if infinite {
        let start = *pts.last().unwrap();
        let pp = profile.piece_on(start - x, start - x + 1.0).shift(x);
        let uq = ub.piece_on(start, start + 1.0);
        acc += int_product_to_inf(&pp, &uq, start)?;
    }
    Ok(acc.max(0.0))
}

/// Shape of the crowding response `φ(E)`; every shape satisfies `φ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// `φ(E) = exp(−c·E)`: relaxing toward 0.
    ExpDecay,
    /// `φ(E) = 1 / (1 + c·E)`: saturating suppression.
    Hill,
    /// `φ(E) = 1 + c·E`: linear reinforcement.
    LinearUp,
}

impl Response {
    /// Evaluates the response factor at environment value `e` with
    /// sensitivity `c`.
    pub fn apply(self, c: f64, e: f64) -> f64 {
        match self {
            Response::ExpDecay => (-c * e).exp(),
            Response::Hill => 1.0 / (1.0 + c * e),
            Response::LinearUp => 1.0 + c * e,
        }
    }

    /// True when larger environments can only lower the factor.
    fn is_suppressive(self) -> bool {
        matches!(self, Response::ExpDecay | Response::Hill)
    }
}

/// Density dependence of one vital rate: either none, or a multiplicative
/// response to an environment aggregate.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    /// The rate ignores the population.
    #[default]
    None,
    /// The rate is scaled by `φ(E(x; u))`.
    Scale {
        response: Response,
        kernel: EnvironmentKernel,
        c: f64,
    },
}

impl Modulation {
    fn validate(&self) -> Result<()> {
        match self {
            Modulation::None => Ok(()),
            Modulation::Scale { kernel, c, .. } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "response sensitivity c must be ≥ 0 and finite, got {c}"
                    )));
                }
                kernel.validate()
            }
        }
    }

    /// The multiplicative factor `φ(E(x; u))`.
    fn factor(&self, u: &Density, x: f64) -> Result<f64> {
        match self {
            Modulation::None => Ok(1.0),
            Modulation::Scale { response, kernel, c } => {
                Ok(response.apply(*c, kernel.environment(u, x)?))
            }
        }
    }

    /// Lower bound of the factor over environments in `[0, e_sup]`.
    fn min_factor(&self, e_sup: f64) -> f64 {
        match self {
            Modulation::None => 1.0,
            Modulation::Scale { response, c, .. } => match response {
                Response::ExpDecay | Response::Hill => response.apply(*c, e_sup),
                Response::LinearUp => 1.0,
            },
        }
    }

    /// Upper bound of the factor over environments in `[0, e_sup]`.
    fn max_factor(&self, e_sup: f64) -> f64 {
        match self {
            Modulation::None => 1.0,
            Modulation::Scale { response, c, .. } => match response {
                Response::ExpDecay | Response::Hill => 1.0,
                Response::LinearUp => response.apply(*c, e_sup),
            },
        }
    }

    fn e_sup(&self, u: &Density) -> f64 {
        match self {
            Modulation::None => 0.0,
            Modulation::Scale { kernel, .. } => kernel.sup_weight() * u.total(),
        }
    }
}

/// One vital rate: a state profile times an optional crowding response,
/// `rate(x, u) = base(x) · φ(E(x; u))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSpec {
    /// The x-profile of the rate; it must start at 0 and declare a tail.
    pub base: GridFn,
    /// Optional density dependence.
    #[serde(default)]
    pub modulation: Modulation,
}

impl RateSpec {
    /// A state-independent, density-independent rate.
    pub fn constant(level: f64) -> Result<RateSpec> {
        Ok(RateSpec {
            base: GridFn::constant(level, 0.0, None)?,
            modulation: Modulation::None,
        })
    }

    /// `rate(x, u) = base(x) · φ(E(x; u))`.
    pub fn eval(&self, x: f64, u: &Density) -> Result<f64> {
        Ok(self.base.eval(x)? * self.modulation.factor(u, x)?)
    }
}

// ---------------------------------------------------------------------------
// Vital rates
// ---------------------------------------------------------------------------

/// Which rates respond to crowding in the reproduction-suppressing direction:
/// births and growth may only drop, losses may only rise, as the density
/// increases.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotoneFlags {
    pub beta: bool,
    pub mu: bool,
    pub growth: bool,
}

impl MonotoneFlags {
    /// True when all three rates have suppressive density dependence (or
    /// none), so the net reproduction number cannot increase with the
    /// density.
    pub fn all(self) -> bool {
        self.beta && self.mu && self.growth
    }
}

/// Validated birth, loss, and growth rates of a population model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawVitalRates")]
pub struct VitalRates {
    beta: RateSpec,
    mu: RateSpec,
    growth: RateSpec,
}

#[derive(Debug, Clone, Deserialize)]
struct RawVitalRates {
    beta: RateSpec,
    mu: RateSpec,
    growth: RateSpec,
}

impl TryFrom<RawVitalRates> for VitalRates {
    type Error = Error;
    fn try_from(raw: RawVitalRates) -> Result<VitalRates> {
        VitalRates::new(raw.beta, raw.mu, raw.growth)
    }
}

impl VitalRates {
    /// Validates the three rates:
    ///
    /// * every profile starts at 0 and declares a tail (rates enter improper
    ///   integrals over the whole half line),
    /// * the birth profile is nonnegative and bounded,
    /// * the loss and growth profiles are strictly positive everywhere —
    ///   positive losses force the survival profile to decay, and positive
    ///   growth keeps the transport nonsingular,
    /// * response sensitivities are finite and `≥ 0`.
    pub fn new(beta: RateSpec, mu: RateSpec, growth: RateSpec) -> Result<Self> {
        for (spec, name) in [(&beta, "beta"), (&mu, "mu"), (&growth, "growth")] {
            let iv = spec.base.interval();
            if iv.a != 0.0 {
                return Err(Error::InvalidFunction(format!(
                    "{name} profile must start at 0, got {}",
                    iv.a
                )));
            }
            if spec.base.tail().is_none() {
                return Err(Error::InvalidFunction(format!(
                    "{name} profile must declare a tail: rates are integrated over [0, ∞)"
                )));
            }
            spec.modulation.validate()?;
        }
        if beta.base.min_value() < 0.0 {
            return Err(Error::InvalidFunction(
                "birth profile must be nonnegative".into(),
            ));
        }
        if !(mu.base.min_value() > 0.0) {
            return Err(Error::InvalidFunction(
                "loss profile must be strictly positive (it bounds the survival decay)".into(),
            ));
        }
        if !(growth.base.min_value() > 0.0) {
            return Err(Error::InvalidFunction(
                "growth profile must be strictly positive".into(),
            ));
        }
        Ok(VitalRates { beta, mu, growth })
    }

    pub fn beta(&self) -> &RateSpec {
        &self.beta
    }

    pub fn mu(&self) -> &RateSpec {
        &self.mu
    }

    pub fn growth(&self) -> &RateSpec {
        &self.growth
    }

    /// Per-rate crowding directions; see [`MonotoneFlags`].
    pub fn monotone_flags(&self) -> MonotoneFlags {
        let suppressive = |m: &Modulation| match m {
            Modulation::None => true,
            Modulation::Scale { response, .. } => response.is_suppressive(),
        };
        let reinforcing = |m: &Modulation| match m {
            Modulation::None => true,
            Modulation::Scale { response, .. } => *response == Response::LinearUp,
        };
        MonotoneFlags {
            beta: suppressive(&self.beta.modulation),
            mu: reinforcing(&self.mu.modulation),
            growth: suppressive(&self.growth.modulation),
        }
    }
}

// ---------------------------------------------------------------------------
// Survival profile internals
// ---------------------------------------------------------------------------

/// Survival data on a model grid: `Π` values, the fitted tail decay rate, and
/// the cumulative-hazard depth reached by the window.
struct SurvivalProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    tail_rate: f64,
    cum_last: f64,
    capped: bool,
}

impl SurvivalProfile {
    fn as_grid_fn(&self) -> GridFn {
        GridFn::new(
            self.grid.clone(),
            self.values.clone(),
            Some(TailSpec::ExpDecay { limit: 0.0, rate: self.tail_rate }),
        )
        .expect("survival profile forms a valid grid function")
    }
}

struct RawSurvival {
    grid: Vec<f64>,
    values: Vec<f64>,
    hazard_min: f64,
    hazard_last: f64,
    cum_last: f64,
}

/// The uniform model grid on `[0, x_max]`; the last node is exactly `x_max`.
fn uniform_grid(x_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(16);
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        g.push(if i + 1 == n { x_max } else { x_max * i as f64 / (n - 1) as f64 });
    }
    g
}

/// Composite Simpson sum over a uniform grid, falling back to one trapezoid
/// on a trailing odd interval.
fn simpson_uniform(grid: &[f64], vals: &[f64]) -> f64 {
    let n = grid.len();
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h = grid[i + 2] - grid[i];
        acc += h / 6.0 * (vals[i] + 4.0 * vals[i + 1] + vals[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        acc += 0.5 * (vals[i] + vals[i + 1]) * (grid[i + 1] - grid[i]);
    }
    acc
}

/// Exponential decay rate fitted to the last two decades of a positive,
/// decaying node sequence: the rate that joins the last node to the most
/// recent node at least `100×` higher.
fn fit_decay_rate(grid: &[f64], vals: &[f64]) -> Option<f64> {
    let last = *vals.last()?;
    let x_last = *grid.last()?;
    if !(last > 0.0) {
        return None;
    }
    let target = last * 100.0;
    let j = (0..vals.len() - 1).rev().find(|&i| vals[i] >= target)?;
    let rate = (vals[j] / last).ln() / (x_last - grid[j]);
    (rate.is_finite() && rate > 0.0).then_some(rate)
}

/// True when `f` lives on exactly this uniform grid (uniform grids are fully
/// determined by their length and endpoints).
fn same_uniform_grid(f: &GridFn, grid: &[f64]) -> bool {
    let g = f.grid();
    g.len() == grid.len() && g[0] == grid[0] && g[g.len() - 1] == grid[grid.len() - 1]
}

/// Exact `∫|a − b|` for two piecewise-linear functions sharing one grid, both
/// with vanishing exponential tails: per-segment closed form with the sign
/// crossing split off, plus the closed-form tail.
fn l1_same_grid(grid: &[f64], a: &[f64], b: &[f64], rate_a: f64, rate_b: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.len() - 1 {
        let (d0, d1) = (a[i] - b[i], a[i + 1] - b[i + 1]);
        let h = grid[i + 1] - grid[i];
        acc += if d0 * d1 >= 0.0 {
            0.5 * (d0.abs() + d1.abs()) * h
        } else {
            0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
        };
    }
    acc + abs_tail_exp(*a.last().unwrap(), rate_a, *b.last().unwrap(), rate_b)
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// A population model: vital rates plus the operations built on them.
#[derive(Debug, Clone)]
pub struct Model {
    rates: VitalRates,
}

impl Model {
    pub fn new(rates: VitalRates) -> Self {
        Model { rates }
    }

    pub fn rates(&self) -> &VitalRates {
        &self.rates
    }

    /// Conservative lower bound on the hazard `μ/g` over all states, used to
    /// size the model window before anything is evaluated. Returns 0 when the
    /// bound degenerates; the window then starts at the domain cap and the
    /// measured hazards shrink it.
    fn hazard_floor(&self, u: &Density) -> f64 {
        let mu = &self.rates.mu;
        let growth = &self.rates.growth;
        let mu_floor = mu.base.min_value() * mu.modulation.min_factor(mu.modulation.e_sup(u));
        let g_cap =
            growth.base.sup_abs() * growth.modulation.max_factor(growth.modulation.e_sup(u));
        if mu_floor > 0.0 && g_cap.is_finite() && g_cap > 0.0 {
            mu_floor / g_cap
        } else {
            0.0
        }
    }

    /// Hazards and survival values on a given grid. The grid is cut where the
    /// cumulative hazard exceeds [`MAX_HAZARD_DEPTH`].
    fn survival_on_grid(&self, u: &Density, grid: Vec<f64>) -> Result<RawSurvival> {
        let n = grid.len();
        let mut hazard = Vec::with_capacity(n);
        let mut speeds = Vec::with_capacity(n);
        for &x in &grid {
            let g = self.rates.growth.eval(x, u)?;
            if !(g > 0.0) {
                return Err(Error::GrowthSingularity { x, value: g });
            }
            hazard.push(self.rates.mu.eval(x, u)? / g);
            speeds.push(g);
        }
        let hazard_min = hazard.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut values = Vec::with_capacity(n);
        values.push(1.0 / speeds[0]);
        let mut cum = 0.0;
        let mut cut = n;
        for i in 1..n {
            cum += 0.5 * (hazard[i - 1] + hazard[i]) * (grid[i] - grid[i - 1]);
            values.push((-cum).exp() / speeds[i]);
            if cum > MAX_HAZARD_DEPTH {
                cut = i + 1;
                break;
            }
        }
        let mut grid = grid;
        grid.truncate(cut);
        values.truncate(cut);
        hazard.truncate(cut);
        Ok(RawSurvival {
            hazard_min,
            hazard_last: *hazard.last().unwrap(),
            cum_last: cum.min(MAX_HAZARD_DEPTH),
            grid,
            values,
        })
    }

    fn assemble_profile(&self, raw: RawSurvival, capped: bool) -> SurvivalProfile {
        let tail_rate = fit_decay_rate(&raw.grid, &raw.values)
            .unwrap_or_else(|| raw.hazard_last.max(1e-12));
        SurvivalProfile {
            grid: raw.grid,
            values: raw.values,
            tail_rate,
            cum_last: raw.cum_last,
            capped,
        }
    }

    /// Builds the survival profile for density `u`: sizes the window from the
    /// measured hazards (re-sizing up to three times when the first guess
    /// overshoots), integrates the hazard by the trapezoid rule on the model
    /// grid, and fits an exponential tail to the last two decades of `Π`.
    fn survival_profile(&self, u: &Density, cfg: &SolverConfig) -> Result<SurvivalProfile> {
        cfg.validate()?;
        let floor = self.hazard_floor(u);
        let mut want = if floor > 0.0 { cfg.efoldings / floor } else { cfg.max_domain };
        for pass in 0.. {
            let x_max = want.min(cfg.max_domain);
            let grid = uniform_grid(x_max, cfg.model_points);
            let raw = self.survival_on_grid(u, grid)?;
            let next = cfg.efoldings / raw.hazard_min;
            if pass < 3 && next.min(cfg.max_domain) < 0.8 * x_max {
                want = next;
                continue;
            }
            return Ok(self.assemble_profile(raw, next > cfg.max_domain));
        }
        unreachable!("window sizing loop always returns")
    }

    /// Re-evaluates survival for a new density, keeping the current window
    /// when the hazard scale moved by less than 5% (so solver iterates stay
    /// on one grid) and re-sizing it otherwise.
    fn refreshed_profile(
        &self,
        u: &Density,
        current: &SurvivalProfile,
        cfg: &SolverConfig,
    ) -> Result<SurvivalProfile> {
        let raw = self.survival_on_grid(u, current.grid.clone())?;
        let x_now = *current.grid.last().unwrap();
        let want = cfg.efoldings / raw.hazard_min;
        let capped = want > cfg.max_domain;
        let clipped = want.min(cfg.max_domain);
        if clipped < 0.95 * x_now || clipped > 1.05 * x_now {
            self.survival_profile(u, cfg)
        } else {
            Ok(self.assemble_profile(raw, capped))
        }
    }

    /// `Π(x, u)`: the survival profile evaluated at one state.
    pub fn survival(&self, x: f64, u: &Density, cfg: &SolverConfig) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!("survival needs x ≥ 0, got {x}")));
        }
        self.survival_function(u, cfg)?.eval(x)
    }

    /// The whole survival profile `Π(·, u)` as a grid function with a fitted
    /// exponential tail.
    pub fn survival_function(&self, u: &Density, cfg: &SolverConfig) -> Result<GridFn> {
        Ok(self.survival_profile(u, cfg)?.as_grid_fn())
    }

    /// The net reproduction number `R(u) = ∫₀^∞ β(x, u) Π(x, u) dx`:
    /// composite Simpson on the model window plus the closed-form mass of the
    /// fitted tail. Errors with a truncation report when the window hit the
    /// domain cap before the hazard accumulated enough decay.
    pub fn net_reproduction(&self, u: &Density, cfg: &SolverConfig) -> Result<f64> {
        let sp = self.survival_profile(u, cfg)?;
        self.reproduction_from(&sp, u, cfg)
    }

    fn reproduction_from(
        &self,
        sp: &SurvivalProfile,
        u: &Density,
        cfg: &SolverConfig,
    ) -> Result<f64> {
        let mut w = Vec::with_capacity(sp.grid.len());
        for (&x, &pi) in sp.grid.iter().zip(&sp.values) {
            w.push(self.rates.beta.eval(x, u)? * pi);
        }
        let body = simpson_uniform(&sp.grid, &w);
        // Beyond the window the birth rate settles toward its tail while Π
        // keeps relaxing at the fitted rate; a birth tail that itself decays
        // to zero steepens the product.
        let extra = match self.rates.beta.base.tail() {
            Some(TailSpec::ExpDecay { limit, rate }) if *limit == 0.0 => *rate,
            _ => 0.0,
        };
        let tail = w.last().unwrap() / (sp.tail_rate + extra);
        let r = body + tail;
        if sp.capped && sp.cum_last < 0.5 * cfg.efoldings {
            return Err(Error::Truncation {
                value: r,
                est_tail_error: tail.abs(),
                tail_tol: 1e-9,
                max_domain: cfg.max_domain,
            });
        }
        if !r.is_finite() {
            return Err(Error::Precondition(
                "net reproduction evaluated non-finite".into(),
            ));
        }
        Ok(r)
    }

    /// The newborn flux functional `G(u) = ∫₀^∞ β(x, u) u(x) dx`, an exact
    /// product integral of the birth rate sampled on the density's own grid.
    pub fn birth_functional(&self, u: &Density) -> Result<f64> {
        let ub = u.base();
        let grid = ub.grid();
        let mut bv = Vec::with_capacity(grid.len());
        for &x in grid {
            bv.push(self.rates.beta.eval(x, u)?);
        }
        let level = *bv.last().unwrap();
        let bfn = GridFn::new(grid.to_vec(), bv, Some(TailSpec::Constant { limit: level }))?;
        let last = ub.last_node();
        let mut total = product_integral(&bfn, ub, 0.0, last);
        let pb = bfn.piece_on(last, last + 1.0);
        let qb = ub.piece_on(last, last + 1.0);
        total += int_product_to_inf(&pb, &qb, last)?;
        Ok(total)
    }

    /// The stationary defect `‖u − G(u) · Π(·, u)‖₁`. Exactly zero for the
    /// zero density.
    pub fn stationary_residual(&self, u: &Density, cfg: &SolverConfig) -> Result<f64> {
        let flux = self.birth_functional(u)?;
        let sp = self.survival_profile(u, cfg)?;
        let vals: Vec<f64> = sp.values.iter().map(|&p| flux * p).collect();
        let v = GridFn::new(
            sp.grid.clone(),
            vals,
            Some(TailSpec::ExpDecay { limit: 0.0, rate: sp.tail_rate }),
        )?;
        l1_distance(u.base(), &v)
    }

    /// The density sustained by a fixed newborn flux `b`: damped fixed-point
    /// iteration `u ← (1−d)·u + d·b·Π(·, u)` starting from the zero density,
    /// stopping when the L¹ change drops below `tol_inner`.
    fn relaxed_density(&self, b: f64, cfg: &SolverConfig) -> Result<(Density, usize)> {
        let mut u = Density::zero();
        let mut sp = self.survival_profile(&u, cfg)?;
        let mut last_change = f64::INFINITY;
        for k in 1..=cfg.max_inner {
            let next = self.damped_update(&u, b, &sp, cfg)?;
            last_change = density_change(&u, &next)?;
            u = next;
            if last_change < cfg.tol_inner {
                return Ok((u, k));
            }
            sp = self.refreshed_profile(&u, &sp, cfg)?;
        }
        Err(Error::NoConvergence {
            iterations: cfg.max_inner,
            last_change,
            tol: cfg.tol_inner,
        })
    }

    fn damped_update(
        &self,
        u: &Density,
        b: f64,
        sp: &SurvivalProfile,
        cfg: &SolverConfig,
    ) -> Result<Density> {
        let d = cfg.damping;
        let mut vals = Vec::with_capacity(sp.grid.len());
        if same_uniform_grid(u.base(), &sp.grid) {
            for (uv, pv) in u.base().values().iter().zip(&sp.values) {
                vals.push((1.0 - d) * uv + d * b * pv);
            }
        } else {
            for (&x, &pv) in sp.grid.iter().zip(&sp.values) {
                vals.push((1.0 - d) * u.eval(x)? + d * b * pv);
            }
        }
        let rate = fit_decay_rate(&sp.grid, &vals).unwrap_or(sp.tail_rate);
        Density::new(GridFn::new(
            sp.grid.clone(),
            vals,
            Some(TailSpec::ExpDecay { limit: 0.0, rate }),
        )?)
    }

    fn flux_response(&self, b: f64, cfg: &SolverConfig) -> Result<(Density, f64, usize)> {
        let (u, inner) = self.relaxed_density(b, cfg)?;
        let r = self.net_reproduction(&u, cfg)?;
        if !r.is_finite() {
            return Err(Error::Precondition(format!(
                "net reproduction not finite at flux {b}"
            )));
        }
        Ok((u, r, inner))
    }

    /// Solves the stationary problem by bisecting the newborn flux until
    /// `R(u_B) = 1`.
    ///
    /// Each flux evaluation relaxes the density to the fixed point of
    /// `u = B · Π(·, u)` (damped iteration from zero). When `R(u_B) − 1` has
    /// one sign across the whole bracket there is no stationary state with a
    /// flux in that range and [`EquilibriumOutcome::NoCrossing`] reports the
    /// endpoint values; otherwise the bracket is narrowed below `bracket_tol`
    /// and the midpoint is returned with its reproduction number, stationary
    /// residual, and iteration counts.
    pub fn solve_equilibrium(
        &self,
        cfg: &SolverConfig,
        bracket: (f64, f64),
    ) -> Result<EquilibriumOutcome> {
        cfg.validate()?;
        let (b_lo, b_hi) = bracket;
        if !(b_lo.is_finite() && b_hi.is_finite() && 0.0 < b_lo && b_lo < b_hi) {
            return Err(Error::Precondition(format!(
                "flux bracket must satisfy 0 < low < high, got ({b_lo}, {b_hi})"
            )));
        }
        let mut outer = 0usize;
        let mut inner_total = 0usize;

        let (_, r_lo, it) = self.flux_response(b_lo, cfg)?;
        outer += 1;
        inner_total += it;
        let (_, r_hi, it) = self.flux_response(b_hi, cfg)?;
        outer += 1;
        inner_total += it;

        let (mut lo, mut hi) = (b_lo, b_hi);
        let mut phi_lo = r_lo - 1.0;
        let phi_hi = r_hi - 1.0;
        if phi_lo == 0.0 {
            hi = lo;
        } else if phi_hi == 0.0 {
            lo = hi;
        } else if phi_lo * phi_hi > 0.0 {
            return Ok(EquilibriumOutcome::NoCrossing { r_low: r_lo, r_high: r_hi });
        }

        while hi - lo > cfg.bracket_tol {
            let mid = 0.5 * (lo + hi);
            let (_, r_mid, it) = self.flux_response(mid, cfg)?;
            outer += 1;
            inner_total += it;
            let phi_mid = r_mid - 1.0;
            if phi_mid == 0.0 {
                lo = mid;
                hi = mid;
            } else if phi_lo * phi_mid < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                phi_lo = phi_mid;
            }
        }

        let b_star = 0.5 * (lo + hi);
        let (u_star, r_at_star, it) = self.flux_response(b_star, cfg)?;
        outer += 1;
        inner_total += it;
        let residual = self.stationary_residual(&u_star, cfg)?;
        let converged = (r_at_star - 1.0).abs() <= cfg.tol_r && residual <= cfg.tol_fix;
        Ok(EquilibriumOutcome::Converged(EquilibriumResult {
            b_star,
            u_star,
            r_at_star,
            residual,
            outer_iterations: outer,
            inner_iterations: inner_total,
            converged,
        }))
    }

    /// Compares the net reproduction number across an ordered pair of
    /// densities. Requires every rate's crowding response to point in the
    /// reproduction-suppressing direction (see [`MonotoneFlags`]); then a
    /// pointwise increase of the density must not raise `R` beyond
    /// [`REPRODUCTION_ORDER_TOL`].
    pub fn check_reproduction_monotone(
        &self,
        u_low: &Density,
        u_high: &Density,
        cfg: &SolverConfig,
    ) -> Result<ReproductionOrderCheck> {
        let flags = self.rates.monotone_flags();
        if !flags.all() {
            let mut bad = Vec::new();
            if !flags.beta {
                bad.push("births must relax under crowding");
            }
            if !flags.mu {
                bad.push("losses must reinforce under crowding");
            }
            if !flags.growth {
                bad.push("growth must relax under crowding");
            }
            return Err(Error::Precondition(format!(
                "reproduction comparison needs suppressive crowding directions: {}",
                bad.join("; ")
            )));
        }
        let ordered_input = pointwise_le(u_low.base(), u_high.base());
        let r_low = self.net_reproduction(u_low, cfg)?;
        let r_high = self.net_reproduction(u_high, cfg)?;
        let delta = r_high - r_low;
        Ok(ReproductionOrderCheck {
            r_low,
            r_high,
            delta,
            ok: delta <= REPRODUCTION_ORDER_TOL,
            ordered_input,
            ratio_profile_ok: ratio_profile_nondecreasing(
                &self.rates.beta.base,
                &self.rates.mu.base,
            ),
        })
    }

    /// Evaluates `R(0)` and classifies the extinct state: above 1 a
    /// nontrivial stationary state is expected; below 1 it is excluded when
    /// every rate is crowding-suppressive, and otherwise the test is
    /// inconclusive. Within `tol_r` of 1 the model sits at the threshold.
    pub fn threshold_report(&self, cfg: &SolverConfig) -> Result<ThresholdReport> {
        let r_zero = self.net_reproduction(&Density::zero(), cfg)?;
        let flags = self.rates.monotone_flags();
        let monotone_mode = flags.all();
        let conclusion = if (r_zero - 1.0).abs() <= cfg.tol_r {
            ThresholdConclusion::Critical
        } else if r_zero > 1.0 {
            ThresholdConclusion::Expected
        } else if monotone_mode {
            ThresholdConclusion::Excluded
        } else {
            ThresholdConclusion::Indeterminate
        };
        Ok(ThresholdReport { r_zero, flags, monotone_mode, conclusion })
    }
}

/// L¹ change between consecutive solver iterates, using the closed form when
/// both live on the same grid with vanishing exponential tails.
fn density_change(a: &Density, b: &Density) -> Result<f64> {
    if same_uniform_grid(a.base(), b.base().grid()) {
        if let (
            Some(TailSpec::ExpDecay { rate: ra, limit: la }),
            Some(TailSpec::ExpDecay { rate: rb, limit: lb }),
        ) = (a.base().tail(), b.base().tail())
        {
            if *la == 0.0 && *lb == 0.0 {
                return Ok(l1_same_grid(
                    b.base().grid(),
                    a.base().values(),
                    b.base().values(),
                    *ra,
                    *rb,
                ));
            }
        }
    }
    l1_distance(a.base(), b.base())
}

/// Samples both functions on their merged nodes, segment midpoints, and a
/// ladder into the tails, and checks `f ≤ g` everywhere (with a relative
/// slack of `1e-12`).
fn pointwise_le(f: &GridFn, g: &GridFn) -> bool {
    let mut pts: Vec<f64> = f.grid().iter().chain(g.grid().iter()).cloned().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    pts.extend(mids);
    let far = f.last_node().max(g.last_node());
    for step in [0.5, 1.0, 2.0, 5.0, 10.0, 25.0] {
        pts.push(far + step);
    }
    for &x in &pts {
        let (fv, gv) = match (f.eval(x), g.eval(x)) {
            (Ok(fv), Ok(gv)) => (fv, gv),
            _ => return false,
        };
        if fv > gv + 1e-12 * (1.0 + gv.abs()) {
            return false;
        }
    }
    f.right_value() <= g.right_value() + 1e-12
}

/// Diagnostic for the strengthened ordering hypothesis: the unmodulated
/// births-per-loss profile `β(x)/μ(x)` must not decrease in `x`.
fn ratio_profile_nondecreasing(beta: &GridFn, mu: &GridFn) -> bool {
    let mut pts: Vec<f64> = beta.grid().iter().chain(mu.grid().iter()).cloned().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    pts.extend(mids);
    let far = beta.last_node().max(mu.last_node());
    for step in [0.5, 1.0, 2.0, 5.0, 10.0, 25.0] {
        pts.push(far + step);
    }
    pts.sort_by(f64::total_cmp);
    let mut prev = f64::NEG_INFINITY;
    for &x in &pts {
        let (b, m) = match (beta.eval(x), mu.eval(x)) {
            (Ok(b), Ok(m)) => (b, m),
            _ => return false,
        };
        if m <= 0.0 {
            return false;
        }
        let r = b / m;
        if r < prev - 1e-10 * (1.0 + prev.abs()) {
            return false;
        }
        prev = prev.max(r);
    }
    true
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// A solved stationary state.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumResult {
    /// The newborn flux `g(0, u*) · u*(0)` sustaining the state.
    pub b_star: f64,
    /// The stationary density.
    pub u_star: Density,
    /// Net reproduction number at the solution; 1 up to solver tolerance.
    pub r_at_star: f64,
    /// Stationary defect `‖u* − G(u*) Π(·, u*)‖₁`.
    pub residual: f64,
    /// Number of flux evaluations (bracket ends, bisection steps, final).
    pub outer_iterations: usize,
    /// Total damped fixed-point iterations across all flux evaluations.
    pub inner_iterations: usize,
    /// Whether `|R − 1| ≤ tol_r` and `residual ≤ tol_fix` both hold.
    pub converged: bool,
}

/// Outcome of the stationary solver.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EquilibriumOutcome {
    /// The bracket contained a flux with `R(u_B) = 1`.
    Converged(EquilibriumResult),
    /// `R(u_B) − 1` kept one sign across the bracket: no stationary state
    /// with a newborn flux in this range.
    NoCrossing { r_low: f64, r_high: f64 },
}

/// Net reproduction numbers across an ordered pair of densities.
#[derive(Debug, Clone, Serialize)]
pub struct ReproductionOrderCheck {
    /// `R` at the smaller density.
    pub r_low: f64,
    /// `R` at the larger density.
    pub r_high: f64,
    /// `r_high − r_low`; crowding-suppressive rates keep this ≤ 0 up to
    /// [`REPRODUCTION_ORDER_TOL`].
    pub delta: f64,
    /// Whether `delta ≤ REPRODUCTION_ORDER_TOL`.
    pub ok: bool,
    /// Whether the inputs were verified to satisfy `u_low ≤ u_high`
    /// pointwise.
    pub ordered_input: bool,
    /// Whether the unmodulated `β/μ` profile is non-decreasing in `x`.
    pub ratio_profile_ok: bool,
}

/// How the extinct state relates to the reproduction threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdConclusion {
    /// `R(0) > 1`: the extinct state is unstable and a nontrivial stationary
    /// state is expected.
    Expected,
    /// `R(0) < 1` with crowding-suppressive rates: no nontrivial stationary
    /// state exists.
    Excluded,
    /// `R(0) < 1` but some rate responds in the reinforcing direction, so
    /// the subthreshold test is inconclusive.
    Indeterminate,
    /// `R(0)` is within `tol_r` of 1.
    Critical,
}

/// Threshold classification of the extinct state.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// Net reproduction number of the extinct state.
    pub r_zero: f64,
    /// Per-rate crowding directions.
    pub flags: MonotoneFlags,
    /// Whether all three rates are crowding-suppressive.
    pub monotone_mode: bool,
    /// The classification drawn from `r_zero` and the flags.
    pub conclusion: ThresholdConclusion,
}
