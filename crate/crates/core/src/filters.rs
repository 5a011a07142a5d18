//! n-dimensional filters and shaping functions used throughout the controller.
//!
//! All multi-dimensional shaping (soft coercion, smooth deadband, hard coercion)
//! is applied radially: the direction of the input is preserved exactly and only
//! its magnitude is mapped, using the radius of the ellipsoid along that direction.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("filter order must be at least 1")]
    ZeroOrder,
    #[error("semi-axis {index} must be finite and positive, got {value}")]
    InvalidSemiAxis { index: usize, value: f64 },
    #[error("soft coercion buffer {buffer} must lie in (0, {min_semi_axis})")]
    InvalidBuffer { buffer: f64, min_semi_axis: f64 },
    #[error("sample time {t} does not advance past {last}")]
    NonIncreasingTime { t: f64, last: f64 },
    #[error("custom weight profile must be non-empty with finite positive weights")]
    InvalidWeights,
}

fn norm<const N: usize>(x: &[f64; N]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn scaled<const N: usize>(x: &[f64; N], s: f64) -> [f64; N] {
    x.map(|v| v * s)
}

/// Principal semi-axis lengths of an axis-aligned ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid<const N: usize> {
    semi_axes: [f64; N],
}

impl<const N: usize> Ellipsoid<N> {
    pub fn new(semi_axes: [f64; N]) -> Result<Self, FilterError> {
        for (index, &value) in semi_axes.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(FilterError::InvalidSemiAxis { index, value });
            }
        }
        Ok(Self { semi_axes })
    }

    pub fn semi_axes(&self) -> [f64; N] {
        self.semi_axes
    }

    pub fn min_semi_axis(&self) -> f64 {
        self.semi_axes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_semi_axis(&self) -> f64 {
        self.semi_axes.iter().copied().fold(0.0, f64::max)
    }

    /// Radius of the ellipsoid along the direction of `x` (which need not be unit).
    ///
    /// Returns the largest semi-axis for a zero direction.
    pub fn radius_along(&self, x: &[f64; N]) -> f64 {
        let m = norm(x);
        if m == 0.0 {
            return self.max_semi_axis();
        }
        let sum: f64 = x
            .iter()
            .zip(self.semi_axes.iter())
            .map(|(xi, ai)| {
                let u = xi / (m * ai);
                u * u
            })
            .sum();
        1.0 / sum.sqrt()
    }

    /// Ellipsoid norm: `1` on the surface.
    pub fn level(&self, x: &[f64; N]) -> f64 {
        x.iter()
            .zip(self.semi_axes.iter())
            .map(|(xi, ai)| (xi / ai) * (xi / ai))
            .sum::<f64>()
            .sqrt()
    }
}

/// Scalar soft coercion of a non-negative magnitude towards `radius`.
///
/// Identity up to `radius - buffer`, then an exponential tail that approaches
/// `radius` from below. The map is C1 at the junction.
pub fn soft_coerce_magnitude(m: f64, radius: f64, buffer: f64) -> f64 {
    let knee = radius - buffer;
    if m <= knee {
        m
    } else {
        // keep the output strictly inside even once the tail underflows
        (radius - buffer * (-(m - knee) / buffer).exp()).min(radius.next_down())
    }
}

/// Symmetric scalar soft coercion to `[-limit, limit]`.
pub fn soft_coerce_1d(x: f64, limit: f64, buffer: f64) -> f64 {
    soft_coerce_magnitude(x.abs(), limit, buffer).copysign(x)
}

/// Scalar smooth deadband of radius `r`: `x^2 / 4r` inside `2r`, `|x| - r` outside.
pub fn smooth_deadband(x: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return x;
    }
    let m = x.abs();
    let out = if m >= 2.0 * r { m - r } else { m * m / (4.0 * r) };
    out.copysign(x)
}

/// One-sided smooth deadband: zero at or below `center`, then a quadratic blend
/// of width `2 * width` into the line `x - center - width`.
pub fn one_sided_smooth_deadband(x: f64, center: f64, width: f64) -> f64 {
    let d = x - center;
    if d <= 0.0 {
        0.0
    } else if width <= 0.0 {
        d
    } else if d >= 2.0 * width {
        d - width
    } else {
        d * d / (4.0 * width)
    }
}

/// Elliptical soft coercion of buffer `buffer`.
///
/// `buffer` must be positive and below the smallest semi-axis; see [`SoftEllipse`]
/// for a validated wrapper.
pub fn soft_coerce_ellip<const N: usize>(x: &[f64; N], e: &Ellipsoid<N>, buffer: f64) -> [f64; N] {
    let m = norm(x);
    if m == 0.0 {
        return [0.0; N];
    }
    let r = e.radius_along(x);
    let out = soft_coerce_magnitude(m, r, buffer);
    if out == m {
        return *x;
    }
    let mut y = scaled(x, out / m);
    // rounding in the rescale can land exactly on the surface
    while e.level(&y) >= 1.0 {
        y = scaled(&y, 1.0 - f64::EPSILON);
    }
    y
}

/// Elliptical smooth deadband with deadband radius given by the ellipsoid.
pub fn smooth_deadband_ellip<const N: usize>(x: &[f64; N], e: &Ellipsoid<N>) -> [f64; N] {
    let m = norm(x);
    if m == 0.0 {
        return [0.0; N];
    }
    let r = e.radius_along(x);
    scaled(x, smooth_deadband(m, r) / m)
}

/// Hard radial clamp onto the ellipsoid.
pub fn coerce_ellip<const N: usize>(x: &[f64; N], e: &Ellipsoid<N>) -> [f64; N] {
    let level = e.level(x);
    if level <= 1.0 {
        *x
    } else {
        scaled(x, 1.0 / level)
    }
}

/// Linear interpolation with the input clamped to the span of the two data points.
pub fn coerced_interp(x: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if x0 == x1 {
        return y0;
    }
    let u = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
    y0 + u * (y1 - y0)
}

/// Ellipsoid plus soft coercion buffer, validated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftEllipse<const N: usize> {
    ellipsoid: Ellipsoid<N>,
    buffer: f64,
}

impl<const N: usize> SoftEllipse<N> {
    pub fn new(semi_axes: [f64; N], buffer: f64) -> Result<Self, FilterError> {
        let ellipsoid = Ellipsoid::new(semi_axes)?;
        let min_semi_axis = ellipsoid.min_semi_axis();
        if !(buffer > 0.0 && buffer < min_semi_axis) {
            return Err(FilterError::InvalidBuffer {
                buffer,
                min_semi_axis,
            });
        }
        Ok(Self { ellipsoid, buffer })
    }

    pub fn ellipsoid(&self) -> &Ellipsoid<N> {
        &self.ellipsoid
    }

    pub fn buffer(&self) -> f64 {
        self.buffer
    }

    pub fn coerce(&self, x: &[f64; N]) -> [f64; N] {
        soft_coerce_ellip(x, &self.ellipsoid, self.buffer)
    }

    /// Whether `x` lies in the image of the coercion, i.e. strictly inside the ellipsoid.
    pub fn contains(&self, x: &[f64; N]) -> bool {
        self.ellipsoid.level(x) < 1.0
    }
}

/// Moving average over the last `order` samples.
#[derive(Debug, Clone)]
pub struct MeanFilter<const N: usize> {
    order: usize,
    samples: VecDeque<[f64; N]>,
}

impl<const N: usize> MeanFilter<N> {
    pub fn new(order: usize) -> Result<Self, FilterError> {
        if order == 0 {
            return Err(FilterError::ZeroOrder);
        }
        Ok(Self {
            order,
            samples: VecDeque::with_capacity(order),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn reset(&mut self) {
        self.samples.clear();
    }

    pub fn step(&mut self, x: [f64; N]) -> [f64; N] {
        if self.samples.len() == self.order {
            self.samples.pop_front();
        }
        self.samples.push_back(x);
        self.value()
    }

    /// Mean of the stored samples (zero when empty).
    pub fn value(&self) -> [f64; N] {
        let mut sum = [0.0; N];
        for s in &self.samples {
            for (acc, v) in sum.iter_mut().zip(s.iter()) {
                *acc += v;
            }
        }
        let n = self.samples.len().max(1) as f64;
        sum.map(|v| v / n)
    }
}

/// Weighting of WLBF samples by age.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightProfile {
    Uniform,
    /// Newest sample weight `n`, oldest `1`, for `n` buffered samples.
    LinearRecency,
    /// Explicit weights indexed by age, newest first. Missing entries reuse the last.
    Custom(Vec<f64>),
}

impl WeightProfile {
    /// Weight of the sample at `age` (0 = newest) in a buffer of `len` samples.
    pub fn weight(&self, age: usize, len: usize) -> f64 {
        match self {
            WeightProfile::Uniform => 1.0,
            WeightProfile::LinearRecency => (len - age) as f64,
            WeightProfile::Custom(w) => w[age.min(w.len() - 1)],
        }
    }

    fn validate(&self) -> Result<(), FilterError> {
        if let WeightProfile::Custom(w) = self {
            if w.is_empty() || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(FilterError::InvalidWeights);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlbfOutput<const N: usize> {
    /// Fitted line evaluated at the newest sample time.
    pub value: [f64; N],
    /// Gradient of the fitted line.
    pub slope: [f64; N],
    /// Fitted line evaluated at the weighted mean sample time.
    pub mean_time_value: [f64; N],
    /// The weighted mean sample time.
    pub mean_time: f64,
}

/// Weighted line of best fit over a sliding window of timestamped samples.
#[derive(Debug, Clone)]
pub struct WlbfFilter<const N: usize> {
    capacity: usize,
    profile: WeightProfile,
    samples: VecDeque<(f64, [f64; N])>,
}

impl<const N: usize> WlbfFilter<N> {
    pub fn new(capacity: usize, profile: WeightProfile) -> Result<Self, FilterError> {
        if capacity == 0 {
            return Err(FilterError::ZeroOrder);
        }
        profile.validate()?;
        Ok(Self {
            capacity,
            profile,
            samples: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn reset(&mut self) {
        self.samples.clear();
    }

    /// Buffered `(t, x)` samples, oldest first.
    pub fn samples(&self) -> impl Iterator<Item = &(f64, [f64; N])> {
        self.samples.iter()
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    pub fn step(&mut self, t: f64, x: [f64; N]) -> Result<WlbfOutput<N>, FilterError> {
        if let Some(&(last, _)) = self.samples.back() {
            if !(t > last) {
                return Err(FilterError::NonIncreasingTime { t, last });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((t, x));
        Ok(self.fit())
    }

    fn fit(&self) -> WlbfOutput<N> {
        let len = self.samples.len();
        let &(t_last, x_last) = self.samples.back().expect("fit called on empty buffer");
        if len < 2 {
            return WlbfOutput {
                value: x_last,
                slope: [0.0; N],
                mean_time_value: x_last,
                mean_time: t_last,
            };
        }
        // Times are taken relative to the newest sample to keep the sums well conditioned.
        let mut sw = 0.0;
        let mut swt = 0.0;
        let mut swx = [0.0; N];
        for (i, (t, x)) in self.samples.iter().enumerate() {
            let w = self.profile.weight(len - 1 - i, len);
            let dt = t - t_last;
            sw += w;
            swt += w * dt;
            for (acc, v) in swx.iter_mut().zip(x.iter()) {
                *acc += w * v;
            }
        }
        let t_mean = swt / sw;
        let x_mean = swx.map(|v| v / sw);
        let mut stt = 0.0;
        let mut stx = [0.0; N];
        for (i, (t, x)) in self.samples.iter().enumerate() {
            let w = self.profile.weight(len - 1 - i, len);
            let dt = t - t_last - t_mean;
            stt += w * dt * dt;
            for k in 0..N {
                stx[k] += w * dt * (x[k] - x_mean[k]);
            }
        }
        let slope = stx.map(|v| v / stt);
        let mut value = [0.0; N];
        for k in 0..N {
            value[k] = x_mean[k] - slope[k] * t_mean;
        }
        WlbfOutput {
            value,
            slope,
            mean_time_value: x_mean,
            mean_time: t_last + t_mean,
        }
    }
}

/// Trapezoidal integrator whose state is soft-coerced into an ellipse every step.
///
/// The coerced value is the starting point of the next update, so the integral
/// can never wind up beyond the bound.
#[derive(Debug, Clone)]
pub struct BoundedIntegrator {
    bound: SoftEllipse<2>,
    value: [f64; 2],
    prev_input: Option<[f64; 2]>,
}

impl BoundedIntegrator {
    pub fn new(bound: SoftEllipse<2>) -> Self {
        Self {
            bound,
            value: [0.0; 2],
            prev_input: None,
        }
    }

    pub fn value(&self) -> [f64; 2] {
        self.value
    }

    pub fn bound(&self) -> &SoftEllipse<2> {
        &self.bound
    }

    pub fn reset(&mut self) {
        self.value = [0.0; 2];
        self.prev_input = None;
    }

    /// Advances by `dt`. The first step treats the input as having been constant.
    ///
    /// An input that reverses direction (negative dot product with the previous
    /// one) is taken as a jump at the sample rather than a linear crossing, so the
    /// whole interval integrates the new input.
    pub fn step(&mut self, u: [f64; 2], dt: f64) -> [f64; 2] {
        let prev = match self.prev_input {
            Some(p) if p[0] * u[0] + p[1] * u[1] >= 0.0 => p,
            _ => u,
        };
        let raw = [
            self.value[0] + 0.5 * dt * (u[0] + prev[0]),
            self.value[1] + 0.5 * dt * (u[1] + prev[1]),
        ];
        self.value = self.bound.coerce(&raw);
        self.prev_input = Some(u);
        self.value
    }
}

/// Limits the rate of change of a scalar signal.
#[derive(Debug, Clone)]
pub struct SlopeLimiter {
    max_rate: f64,
    value: f64,
}

impl SlopeLimiter {
    pub fn new(max_rate: f64, initial: f64) -> Self {
        Self {
            max_rate: max_rate.abs(),
            value: initial,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    pub fn reset(&mut self, value: f64) {
        self.value = value;
    }

    pub fn step(&mut self, x: f64, dt: f64) -> f64 {
        let max_step = self.max_rate * dt;
        self.value += (x - self.value).clamp(-max_step, max_step);
        self.value
    }
}

/// Holds the maximum input seen within the trailing time window `(t - window, t]`.
#[derive(Debug, Clone)]
pub struct HoldFilter {
    window: f64,
    // Monotone queue: values strictly decreasing from front to back.
    queue: VecDeque<(f64, f64)>,
}

impl HoldFilter {
    pub fn new(window: f64) -> Self {
        Self {
            window: window.max(0.0),
            queue: VecDeque::new(),
        }
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn reset(&mut self) {
        self.queue.clear();
    }

    pub fn step(&mut self, x: f64, t: f64) -> f64 {
        while matches!(self.queue.back(), Some(&(_, v)) if v <= x) {
            self.queue.pop_back();
        }
        self.queue.push_back((t, x));
        while matches!(self.queue.front(), Some(&(ts, _)) if ts <= t - self.window) {
            self.queue.pop_front();
        }
        self.queue.front().map_or(x, |&(_, v)| v)
    }
}

/// First-order low pass parameterised by its 99% settling time.
#[derive(Debug, Clone)]
pub struct LowPass {
    settling_time: f64,
    value: f64,
}

impl LowPass {
    pub fn new(settling_time: f64, initial: f64) -> Self {
        Self {
            settling_time: settling_time.max(0.0),
            value: initial,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn reset(&mut self, value: f64) {
        self.value = value;
    }

    /// Per-step smoothing factor for a step of `dt`.
    pub fn alpha(&self, dt: f64) -> f64 {
        if self.settling_time == 0.0 {
            return 1.0;
        }
        let tau = self.settling_time / 100f64.ln();
        1.0 - (-dt / tau).exp()
    }

    pub fn step(&mut self, x: f64, dt: f64) -> f64 {
        self.value += self.alpha(dt) * (x - self.value);
        self.value
    }
}

/// Low pass whose per-step change is additionally rate limited.
#[derive(Debug, Clone)]
pub struct SlopeLimitedLowPass {
    low_pass: LowPass,
    max_rate: f64,
}

impl SlopeLimitedLowPass {
    pub fn new(settling_time: f64, max_rate: f64, initial: f64) -> Self {
        Self {
            low_pass: LowPass::new(settling_time, initial),
            max_rate: max_rate.abs(),
        }
    }

    pub fn value(&self) -> f64 {
        self.low_pass.value
    }

    pub fn reset(&mut self, value: f64) {
        self.low_pass.reset(value);
    }

    pub fn step(&mut self, x: f64, dt: f64) -> f64 {
        let target = self.low_pass.value + self.low_pass.alpha(dt) * (x - self.low_pass.value);
        let max_step = self.max_rate * dt;
        self.low_pass.value += (target - self.low_pass.value).clamp(-max_step, max_step);
        self.low_pass.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_filter_warmup_and_window() {
        let mut f = MeanFilter::<1>::new(2).unwrap();
        assert_eq!(f.step([0.0]), [0.0]);
        assert_eq!(f.step([1.0]), [0.5]);
        assert_eq!(f.step([3.0]), [2.0]);
        let mut c = MeanFilter::<2>::new(5).unwrap();
        for _ in 0..12 {
            assert_eq!(c.step([0.25, -4.0]), [0.25, -4.0]);
        }
        assert_eq!(MeanFilter::<2>::new(0).unwrap_err(), FilterError::ZeroOrder);
    }

    #[test]
    fn wlbf_exact_line_and_constant() {
        let mut f = WlbfFilter::<1>::new(6, WeightProfile::LinearRecency).unwrap();
        let mut out = None;
        for k in 0..10 {
            let t = 0.1 * k as f64;
            out = Some(f.step(t, [2.0 * t + 1.0]).unwrap());
        }
        let out = out.unwrap();
        assert_abs_diff_eq!(out.slope[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.value[0], 2.0 * 0.9 + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.mean_time_value[0], 2.0 * out.mean_time + 1.0, epsilon = 1e-12);

        let mut c = WlbfFilter::<2>::new(4, WeightProfile::Uniform).unwrap();
        for k in 0..7 {
            let o = c.step(k as f64, [3.0, -1.0]).unwrap();
            assert_abs_diff_eq!(o.slope[0], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(o.slope[1], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(o.value[0], 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn wlbf_single_sample_and_time_order() {
        let mut f = WlbfFilter::<1>::new(3, WeightProfile::Uniform).unwrap();
        let o = f.step(1.0, [5.0]).unwrap();
        assert_eq!(o.slope, [0.0]);
        assert_eq!(o.value, [5.0]);
        assert!(matches!(
            f.step(1.0, [6.0]),
            Err(FilterError::NonIncreasingTime { .. })
        ));
        assert_eq!(f.len(), 1);
        assert!(WlbfFilter::<1>::new(3, WeightProfile::Custom(vec![])).is_err());
    }

    #[test]
    fn soft_coercion_1d_value() {
        let e = Ellipsoid::new([1.0]).unwrap();
        let y = soft_coerce_ellip(&[1.0], &e, 0.2);
        assert_abs_diff_eq!(y[0], 1.0 - 0.2 * (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(y[0], 0.92642, epsilon = 1e-5);
        assert_eq!(soft_coerce_ellip(&[0.5], &e, 0.2), [0.5]);
        assert_eq!(soft_coerce_ellip(&[-0.8], &e, 0.2), [-0.8]);
        assert_eq!(soft_coerce_ellip(&[0.0, 0.0], &Ellipsoid::new([1.0, 2.0]).unwrap(), 0.2), [0.0, 0.0]);
        let far = soft_coerce_ellip(&[1e6], &e, 0.2)[0];
        assert!(far < 1.0 && far > 1.0 - 1e-12);
    }

    #[test]
    fn soft_ellipse_validation() {
        assert!(matches!(
            SoftEllipse::new([1.0, -0.5], 0.1),
            Err(FilterError::InvalidSemiAxis { index: 1, .. })
        ));
        assert!(matches!(
            SoftEllipse::new([1.0, 0.5], 0.5),
            Err(FilterError::InvalidBuffer { .. })
        ));
        assert!(SoftEllipse::new([1.0, 0.5], 0.0).is_err());
        assert!(SoftEllipse::new([1.0, 0.5], 0.49).is_ok());
    }

    #[test]
    fn deadband_values() {
        let e = Ellipsoid::new([1.0]).unwrap();
        assert_eq!(smooth_deadband_ellip(&[0.0], &e), [0.0]);
        assert_abs_diff_eq!(smooth_deadband_ellip(&[2.0], &e)[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(smooth_deadband_ellip(&[10.0], &e)[0], 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(smooth_deadband_ellip(&[-10.0], &e)[0], -9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(smooth_deadband(0.5, 1.0), 0.0625, epsilon = 1e-15);
        assert_eq!(one_sided_smooth_deadband(0.1, 0.2, 0.05), 0.0);
        assert_eq!(one_sided_smooth_deadband(0.2, 0.2, 0.05), 0.0);
        assert_abs_diff_eq!(one_sided_smooth_deadband(0.5, 0.2, 0.05), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn coerced_interpolation() {
        assert_eq!(coerced_interp(1.0, 1.0, 3.0, 10.0, 20.0), 10.0);
        assert_eq!(coerced_interp(2.0, 1.0, 3.0, 10.0, 20.0), 15.0);
        assert_eq!(coerced_interp(9.0, 1.0, 3.0, 10.0, 20.0), 20.0);
        assert_eq!(coerced_interp(-9.0, 1.0, 3.0, 10.0, 20.0), 10.0);
        assert_eq!(coerced_interp(-9.0, 3.0, 1.0, 10.0, 20.0), 20.0);
        assert_eq!(coerced_interp(5.0, 2.0, 2.0, 7.0, 8.0), 7.0);
    }

    #[test]
    fn hard_coercion_is_radial() {
        let e = Ellipsoid::new([0.1, 0.2]).unwrap();
        let y = coerce_ellip(&[1.0, 1.0], &e);
        assert_abs_diff_eq!(e.level(&y), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[0], y[1], epsilon = 1e-15);
        assert_eq!(coerce_ellip(&[0.05, 0.0], &e), [0.05, 0.0]);
    }

    #[test]
    fn integrator_trapezoid_inside_bound() {
        let bound = SoftEllipse::new([1.0, 1.0], 0.2).unwrap();
        let mut i = BoundedIntegrator::new(bound);
        for _ in 0..100 {
            i.step([0.0, 0.0], 0.01);
        }
        assert_eq!(i.value(), [0.0, 0.0]);
        i.reset();
        let u = [0.1, -0.05];
        let dt = 0.01;
        // closed-form trapezoid sums with the first step treated as constant input
        for n in 1..=200 {
            let y = i.step(u, dt);
            let t = n as f64 * dt;
            assert_abs_diff_eq!(y[0], u[0] * t, epsilon = 1e-9);
            assert_abs_diff_eq!(y[1], u[1] * t, epsilon = 1e-9);
        }
    }

    #[test]
    fn integrator_trapezoid_uses_previous_input() {
        let bound = SoftEllipse::new([10.0, 10.0], 1.0).unwrap();
        let mut i = BoundedIntegrator::new(bound);
        i.step([1.0, 0.0], 0.1);
        let y = i.step([3.0, 0.0], 0.1);
        assert_abs_diff_eq!(y[0], 0.1 + 0.2, epsilon = 1e-15);
    }

    #[test]
    fn integrator_reversal_is_a_jump() {
        let bound = SoftEllipse::new([10.0, 10.0], 1.0).unwrap();
        let mut i = BoundedIntegrator::new(bound);
        i.step([1.0, 1.0], 0.1);
        let y = i.step([-2.0, 0.5], 0.1);
        assert_abs_diff_eq!(y[0], 0.1 - 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], 0.1 + 0.05, epsilon = 1e-15);
    }

    #[test]
    fn slope_limiter_steps() {
        let mut s = SlopeLimiter::new(0.1, 0.0);
        assert_abs_diff_eq!(s.step(1.0, 0.01), 0.001, epsilon = 1e-15);
        let mut s = SlopeLimiter::new(10.0, 0.0);
        assert_eq!(s.step(0.05, 0.01), 0.05);
        let mut s = SlopeLimiter::new(1.0, 0.0);
        let mut n = 0;
        while s.step(0.37, 0.01) != 0.37 {
            n += 1;
            assert!(n < 100);
        }
        for _ in 0..10 {
            assert_eq!(s.step(0.37, 0.01), 0.37);
        }
    }

    #[test]
    fn hold_filter_pulse_and_monotone() {
        let mut h = HoldFilter::new(0.4);
        for k in 0..50 {
            let t = k as f64 * 0.01;
            assert_eq!(h.step(k as f64, t), k as f64);
        }
        let mut h = HoldFilter::new(0.25);
        for k in 0..20 {
            assert_eq!(h.step(2.5, k as f64 * 0.01), 2.5);
        }
    }

    #[test]
    fn hold_filter_matches_window_scan() {
        let window = 0.4;
        let mut h = HoldFilter::new(window);
        let mut history: Vec<(f64, f64)> = Vec::new();
        let mut state = 12345u64;
        for k in 0..2000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = if k == 100 { 5.0 } else { ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5 };
            let t = k as f64 * 0.01;
            history.push((t, x));
            let brute = history
                .iter()
                .filter(|(ts, _)| *ts > t - window)
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(h.step(x, t), brute, "cycle {k}");
        }
    }

    #[test]
    fn low_pass_settling_time() {
        let mut lp = LowPass::new(2.0, 0.0);
        let dt = 0.01;
        let mut y = 0.0;
        for _ in 0..200 {
            y = lp.step(1.0, dt);
        }
        assert_abs_diff_eq!(y, 0.99, epsilon = 1e-9);
        let mut passthrough = LowPass::new(0.0, 0.0);
        assert_eq!(passthrough.step(3.0, dt), 3.0);
    }

    #[test]
    fn slope_limited_low_pass_rate() {
        let mut f = SlopeLimitedLowPass::new(0.1, 0.5, 0.0);
        let y = f.step(100.0, 0.01);
        assert_abs_diff_eq!(y, 0.005, epsilon = 1e-15);
        let mut g = SlopeLimitedLowPass::new(1.0, 1e9, 0.0);
        let mut lp = LowPass::new(1.0, 0.0);
        for _ in 0..50 {
            assert_abs_diff_eq!(g.step(1.0, 0.01), lp.step(1.0, 0.01), epsilon = 1e-15);
        }
    }
}
