//! Piecewise-linear functions on an interval, with declared tail behaviour.
//!
//! Every function handled by this crate is represented the same way: a
//! strictly increasing grid of sample points, one value per point, linear
//! interpolation in between, and — when the interval is unbounded — an
//! explicit [`TailSpec`] describing the function beyond the last grid point.
//! Limits at infinity are therefore *declared data*, never detected
//! numerically, and the representation is continuous by construction (jump
//! parts of a bounded-variation decomposition are deliberately unsupported).
//!
//! Two refinements of [`GridFn`] carry the hypotheses that the integral
//! functionals in [`crate::stieltjes`] need:
//!
//! * [`MonotoneFn`] — a non-negative function with an asserted monotonicity
//!   direction, validated against the sampled increments, plus its sup bound;
//! * [`BVFn`] — a function of (automatically finite) total variation together
//!   with its right-endpoint value or declared limit. Membership in the class
//!   of integrators that vanish at the right endpoint is tested with
//!   [`BVFn::in_set_a`].
//!
//! The tie rule for monotonicity is shared by every classification in the
//! crate: an increment counts as strict only when it exceeds [`STRICT_TOL`],
//! and as weakly monotone when it is at least `-STRICT_TOL`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Increments larger than this count as strictly monotone; increments no
/// smaller than its negative count as weakly monotone.
pub const STRICT_TOL: f64 = 1e-12;

/// An integrator belongs to the vanishing-at-`b` class when the absolute
/// value of its right value (or declared limit) is at most this.
pub const SET_A_TOL: f64 = 1e-9;

/// A closed interval `[a, b]`, or the half line `[a, ∞)` when `b` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// Left endpoint.
    pub a: f64,
    /// Right endpoint; `None` means unbounded.
    pub b: Option<f64>,
}

impl Interval {
    /// Bounded interval `[a, b]`, requiring `a < b`.
    pub fn finite(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("interval endpoints must be finite, got [{a}, {b}]")));
        }
        if a >= b {
            return Err(Error::Domain(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b: Some(b) })
    }

    /// The half line `[a, ∞)`.
    pub fn half_line(a: f64) -> Self {
        Interval { a, b: None }
    }

    /// Whether the interval is bounded.
    pub fn is_finite(&self) -> bool {
        self.b.is_some()
    }

    /// Whether `x` lies in the interval.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && self.b.map_or(true, |b| x <= b)
    }
}

/// Behaviour of a function beyond its last grid point.
///
/// `Constant` keeps the function at `limit` (which must match the last grid
/// value, so the representation stays continuous). `ExpDecay` relaxes the last
/// grid value `v` toward `limit` at rate `rate > 0`:
/// `f(x) = limit + (v - limit) · exp(-rate · (x - x_last))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailSpec {
    /// Constant tail at `limit`.
    Constant { limit: f64 },
    /// Exponential relaxation toward `limit` (defaults to 0) at `rate > 0`.
    ExpDecay {
        #[serde(default)]
        limit: f64,
        rate: f64,
    },
}

impl TailSpec {
    /// The declared value at infinity.
    pub fn limit(&self) -> f64 {
        match *self {
            TailSpec::Constant { limit } | TailSpec::ExpDecay { limit, .. } => limit,
        }
    }
}

/// One analytic piece of a represented function: either a line segment or an
/// exponential tail arc. Used internally to integrate in closed form.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece {
    /// `f(x) = y0 + slope · (x - x0)`
    Linear { x0: f64, y0: f64, slope: f64 },
    /// `f(x) = limit + coeff · exp(-rate · (x - x0))`
    Exp { x0: f64, limit: f64, coeff: f64, rate: f64 },
}

impl Piece {
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match *self {
            Piece::Linear { x0, y0, slope } => y0 + slope * (x - x0),
            Piece::Exp { x0, limit, coeff, rate } => limit + coeff * (-rate * (x - x0)).exp(),
        }
    }

    /// The same piece expressed in a coordinate shifted by `dx`
    /// (`shifted(x) = original(x - dx)`).
    pub(crate) fn shift(&self, dx: f64) -> Piece {
        match *self {
            Piece::Linear { x0, y0, slope } => Piece::Linear { x0: x0 + dx, y0, slope },
            Piece::Exp { x0, limit, coeff, rate } => Piece::Exp { x0: x0 + dx, limit, coeff, rate },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawGridFn {
    grid: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    tail: Option<TailSpec>,
}

impl TryFrom<RawGridFn> for GridFn {
    type Error = Error;
    fn try_from(raw: RawGridFn) -> Result<GridFn> {
        GridFn::new(raw.grid, raw.values, raw.tail)
    }
}

/// A continuous piecewise-linear function, optionally extended to `[a, ∞)`
/// by a [`TailSpec`].
///
/// Invariants (enforced at construction): the grid is strictly increasing
/// with at least two points, all numbers are finite, an exponential tail has
/// positive rate, and a constant tail matches the last grid value. The
/// interval is bounded exactly when there is no tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFn")]
pub struct GridFn {
    grid: Vec<f64>,
    values: Vec<f64>,
    tail: Option<TailSpec>,
}

impl GridFn {
    /// Build a function from samples, validating every structural invariant.
    pub fn new(grid: Vec<f64>, values: Vec<f64>, tail: Option<TailSpec>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidFunction(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidFunction("need at least two grid points".into()));
        }
        if let Some(bad) = grid.iter().chain(values.iter()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite entry {bad}")));
        }
        if let Some(i) = (1..grid.len()).find(|&i| grid[i] <= grid[i - 1]) {
            return Err(Error::InvalidFunction(format!(
                "grid must be strictly increasing, violated at index {i} ({} then {})",
                grid[i - 1],
                grid[i]
            )));
        }
        match tail {
            Some(TailSpec::ExpDecay { limit, rate }) => {
                if !limit.is_finite() || !rate.is_finite() || rate <= 0.0 {
                    return Err(Error::InvalidFunction(format!(
                        "exponential tail needs finite limit and rate > 0, got limit {limit}, rate {rate}"
                    )));
                }
            }
            Some(TailSpec::Constant { limit }) => {
                let last = *values.last().unwrap();
                let scale = 1.0_f64.max(limit.abs());
                if !limit.is_finite() || (last - limit).abs() > 1e-12 * scale {
                    return Err(Error::InvalidFunction(format!(
                        "constant tail limit {limit} must match the last grid value {last}"
                    )));
                }
            }
            None => {}
        }
        Ok(GridFn { grid, values, tail })
    }

    /// Sample a closure on `n ≥ 2` uniformly spaced points of `[a, b]`.
    pub fn sample<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, tail: Option<TailSpec>) -> Result<Self> {
        Self::sample_graded(f, a, b, n, 1.0, tail)
    }

    /// Sample a closure on `n ≥ 2` points of `[a, b]` placed at
    /// `a + (b-a) · t^exponent` for uniform `t`; `exponent > 1` clusters
    /// points near `a` (useful for integrands with a root-type corner there).
    pub fn sample_graded<F: Fn(f64) -> f64>(
        f: F,
        a: f64,
        b: f64,
        n: usize,
        exponent: f64,
        tail: Option<TailSpec>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidFunction("need at least two sample points".into()));
        }
        if !(exponent > 0.0) {
            return Err(Error::InvalidFunction(format!("grading exponent must be positive, got {exponent}")));
        }
        let mut grid = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let x = if i + 1 == n { b } else { a + (b - a) * t.powf(exponent) };
            grid.push(x);
            values.push(f(x));
        }
        GridFn::new(grid, values, tail)
    }

    /// The constant function `c`, on `[a, b]` or on `[a, ∞)` when `b` is `None`.
    pub fn constant(c: f64, a: f64, b: Option<f64>) -> Result<Self> {
        match b {
            Some(b) => GridFn::new(vec![a, b], vec![c, c], None),
            None => GridFn::new(vec![a, a + 1.0], vec![c, c], Some(TailSpec::Constant { limit: c })),
        }
    }

    /// Grid nodes.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Values at the grid nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Declared tail, if the domain is unbounded.
    pub fn tail(&self) -> Option<&TailSpec> {
        self.tail.as_ref()
    }

    /// Domain of definition.
    pub fn interval(&self) -> Interval {
        Interval {
            a: self.grid[0],
            b: if self.tail.is_some() { None } else { Some(*self.grid.last().unwrap()) },
        }
    }

    /// Last grid node (start of the tail region when one exists).
    pub fn last_node(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Right endpoint value for a bounded domain, declared limit otherwise.
    pub fn right_value(&self) -> f64 {
        match self.tail {
            Some(ref t) => t.limit(),
            None => *self.values.last().unwrap(),
        }
    }

    /// Whether the whole domain of `other` is contained in this domain.
    pub fn covers(&self, iv: &Interval) -> bool {
        let own = self.interval();
        own.a <= iv.a
            && match (own.b, iv.b) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(ob), Some(b)) => b <= ob,
            }
    }

    /// Evaluate at `x`. Inside the grid this is linear interpolation (exact
    /// at nodes); beyond the last node the tail formula applies. Points
    /// outside the domain are a domain error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("cannot evaluate at {x}")));
        }
        let a = self.grid[0];
        if x < a {
            return Err(Error::Domain(format!("x = {x} lies left of the domain start {a}")));
        }
        let last = self.last_node();
        if x >= last {
            return match self.tail {
                None => {
                    if x == last {
                        Ok(*self.values.last().unwrap())
                    } else {
                        Err(Error::Domain(format!("x = {x} lies right of the domain end {last}")))
                    }
                }
                Some(TailSpec::Constant { limit }) => Ok(limit),
                Some(TailSpec::ExpDecay { limit, rate }) => {
                    let v = *self.values.last().unwrap();
                    Ok(limit + (v - limit) * (-rate * (x - last)).exp())
                }
            };
        }
        let idx = self.grid.partition_point(|&g| g <= x);
        let i = idx - 1;
        if self.grid[i] == x {
            return Ok(self.values[i]);
        }
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let t = (x - x0) / (x1 - x0);
        Ok(y0 + t * (y1 - y0))
    }

    /// The analytic piece covering the segment `[s, t]`, which must not
    /// straddle a grid node (callers split at nodes first).
    pub(crate) fn piece_on(&self, s: f64, t: f64) -> Piece {
        let mid = 0.5 * (s + t);
        let last = self.last_node();
        if mid >= last {
            let v = *self.values.last().unwrap();
            return match self.tail {
                Some(TailSpec::ExpDecay { limit, rate }) => {
                    Piece::Exp { x0: last, limit, coeff: v - limit, rate }
                }
                Some(TailSpec::Constant { limit }) => Piece::Linear { x0: last, y0: limit, slope: 0.0 },
                // Bounded domain: only reachable when t == last (zero-length
                // residual segment); treat as the final linear piece.
                None => {
                    let n = self.grid.len();
                    let slope = (self.values[n - 1] - self.values[n - 2]) / (self.grid[n - 1] - self.grid[n - 2]);
                    Piece::Linear { x0: self.grid[n - 2], y0: self.values[n - 2], slope }
                }
            };
        }
        let idx = self.grid.partition_point(|&g| g <= mid);
        let i = idx.max(1) - 1;
        let slope = (self.values[i + 1] - self.values[i]) / (self.grid[i + 1] - self.grid[i]);
        Piece::Linear { x0: self.grid[i], y0: self.values[i], slope }
    }

    /// Grid nodes strictly inside `(s, t)`.
    pub(crate) fn nodes_within(&self, s: f64, t: f64) -> &[f64] {
        let lo = self.grid.partition_point(|&g| g <= s);
        let hi = self.grid.partition_point(|&g| g < t);
        &self.grid[lo..hi]
    }

    /// Total variation over the whole domain: the sum of absolute increments
    /// plus the (monotone) tail movement.
    pub fn total_variation(&self) -> f64 {
        let nodes: f64 = self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        nodes + self.tail_variation()
    }

    fn tail_variation(&self) -> f64 {
        match self.tail {
            Some(TailSpec::ExpDecay { limit, .. }) => (self.values.last().unwrap() - limit).abs(),
            _ => 0.0,
        }
    }

    /// Total variation of the restriction to `[x, ∞)` (or `[x, b]`).
    pub fn variation_beyond(&self, x: f64) -> Result<f64> {
        let fx = self.eval(x)?;
        let last = self.last_node();
        if x >= last {
            return Ok(match self.tail {
                Some(TailSpec::ExpDecay { limit, .. }) => (fx - limit).abs(),
                _ => 0.0,
            });
        }
        let idx = self.grid.partition_point(|&g| g <= x);
        let mut var = (self.values[idx] - fx).abs();
        var += self.values[idx..].windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
        Ok(var + self.tail_variation())
    }

    /// Supremum of `|f|` over the domain.
    pub fn sup_abs(&self) -> f64 {
        let node_max = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        match self.tail {
            Some(ref t) => node_max.max(t.limit().abs()),
            None => node_max,
        }
    }

    /// Infimum of `f` over the domain (the tail is monotone, so node values
    /// and the limit suffice).
    pub fn min_value(&self) -> f64 {
        let node_min = self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        match self.tail {
            Some(ref t) => node_min.min(t.limit()),
            None => node_min,
        }
    }

    /// Strongest monotonicity direction consistent with the sampled
    /// increments (including the tail movement), under the tie rule:
    /// strict needs every increment `> tol`, weak needs every increment
    /// `≥ -tol`. Returns `None` when the function is not monotone.
    pub fn classify_monotone(&self, tol: f64) -> Option<MonotoneClass> {
        let mut diffs: Vec<f64> = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        match self.tail {
            Some(TailSpec::ExpDecay { limit, .. }) => diffs.push(limit - self.values.last().unwrap()),
            Some(TailSpec::Constant { .. }) => diffs.push(0.0),
            None => {}
        }
        let all_const = diffs.iter().all(|d| d.abs() <= tol);
        if all_const {
            return Some(MonotoneClass { direction: Direction::NonDecreasing, constant: true });
        }
        if diffs.iter().all(|&d| d > tol) {
            return Some(MonotoneClass { direction: Direction::Increasing, constant: false });
        }
        if diffs.iter().all(|&d| d >= -tol) {
            return Some(MonotoneClass { direction: Direction::NonDecreasing, constant: false });
        }
        if diffs.iter().all(|&d| d < -tol) {
            return Some(MonotoneClass { direction: Direction::Decreasing, constant: false });
        }
        if diffs.iter().all(|&d| d <= tol) {
            return Some(MonotoneClass { direction: Direction::NonIncreasing, constant: false });
        }
        None
    }
}

/// A monotonicity direction; the strict variants require every sampled
/// increment to clear [`STRICT_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    NonDecreasing,
    Decreasing,
    NonIncreasing,
}

impl Direction {
    /// Whether the direction is one of the two upward ones.
    pub fn is_upward(&self) -> bool {
        matches!(self, Direction::Increasing | Direction::NonDecreasing)
    }
}

/// Result of [`GridFn::classify_monotone`]: the strongest direction, plus a
/// flag marking constant functions (which are weakly monotone both ways).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotoneClass {
    pub direction: Direction,
    pub constant: bool,
}

impl MonotoneClass {
    /// Whether a function with this classification satisfies the asserted
    /// direction. A constant function admits both weak directions but
    /// neither strict one; a strict classification admits its weak form.
    pub fn admits(&self, dir: Direction) -> bool {
        use Direction::*;
        if self.constant {
            return matches!(dir, NonDecreasing | NonIncreasing);
        }
        matches!(
            (self.direction, dir),
            (Increasing, Increasing)
                | (Increasing, NonDecreasing)
                | (NonDecreasing, NonDecreasing)
                | (Decreasing, Decreasing)
                | (Decreasing, NonIncreasing)
                | (NonIncreasing, NonIncreasing)
        )
    }
}

/// A non-negative [`GridFn`] with an asserted monotonicity direction and its
/// sup bound, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFn {
    base: GridFn,
    direction: Direction,
    bound: f64,
}

impl MonotoneFn {
    /// Validate that `base` is non-negative and that its sampled increments
    /// admit `direction` under the tie rule.
    pub fn new(base: GridFn, direction: Direction) -> Result<Self> {
        if base.min_value() < 0.0 {
            return Err(Error::InvalidFunction(format!(
                "monotone weights must be non-negative, found minimum {}",
                base.min_value()
            )));
        }
        let class = base.classify_monotone(STRICT_TOL).ok_or_else(|| {
            Error::InvalidFunction("function is not monotone under the increment tie rule".into())
        })?;
        if !class.admits(direction) {
            return Err(Error::InvalidFunction(format!(
                "sampled increments classify as {:?} (constant: {}), which does not admit {:?}",
                class.direction, class.constant, direction
            )));
        }
        let bound = base.sup_abs();
        Ok(MonotoneFn { base, direction, bound })
    }

    pub fn base(&self) -> &GridFn {
        &self.base
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Supremum of `|f|` over the domain.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.base.eval(x)
    }

    pub fn interval(&self) -> Interval {
        self.base.interval()
    }
}

/// A [`GridFn`] regarded as an integrator: continuous, of bounded variation
/// (automatic for this representation), with its right value cached.
#[derive(Debug, Clone, PartialEq)]
pub struct BVFn {
    base: GridFn,
    right_value: f64,
}

impl BVFn {
    pub fn new(base: GridFn) -> Self {
        let right_value = base.right_value();
        BVFn { base, right_value }
    }

    pub fn base(&self) -> &GridFn {
        &self.base
    }

    /// Value at the right endpoint, or the declared limit at infinity.
    pub fn right_value(&self) -> f64 {
        self.right_value
    }

    /// Whether the integrator vanishes at the right endpoint, within
    /// [`SET_A_TOL`].
    pub fn in_set_a(&self) -> bool {
        self.right_value.abs() <= SET_A_TOL
    }

    pub fn total_variation(&self) -> f64 {
        self.base.total_variation()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.base.eval(x)
    }

    pub fn interval(&self) -> Interval {
        self.base.interval()
    }
}
