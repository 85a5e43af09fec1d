//! q-numbers at generic points and at odd roots of unity.
//!
//! All q-integers are evaluated through `q = exp(w)`. Square roots use the
//! branch obtained by continuing `sqrt([n])` from real `w > 0`, which keeps
//! every coefficient analytic in `w` on a neighbourhood of the unit circle
//! from the right. At a root of unity the vanishing factors `[j l]` are
//! tracked as powers of `sqrt([l])` (see [`RootTerm`]).

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QgzError, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Values within this relative distance are treated as coinciding limits.
pub const LIMIT_TOL: f64 = 1e-9;

/// Default generic angle, `1/(2e)`.
pub const DEFAULT_ANGLE: f64 = 0.183_939_720_585_721_15;

/// Largest denominator rejected by [`QParam::generic`].
pub const DEFAULT_DENOMINATOR_GUARD: u32 = 64;

/// A primitive root of unity `exp(2 pi i m / l)` with `l` odd and `l > 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RootOfUnity {
    l: u32,
    m: u32,
}

impl RootOfUnity {
    pub fn new(l: u32, m: u32) -> Result<Self> {
        if l <= 2 || l.is_multiple_of(2) {
            return Err(QgzError::InvalidRoot(format!(
                "l = {l} must be odd and > 2"
            )));
        }
        let m = m % l;
        if m == 0 || num_integer::gcd(m, l) != 1 {
            return Err(QgzError::InvalidRoot(format!(
                "m = {m} is not coprime to l = {l}"
            )));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn angle(&self) -> f64 {
        2.0 * PI * self.m as f64 / self.l as f64
    }

    /// `exp(2 pi i k / l)` with the exponent reduced first.
    fn unit(&self, k: i64) -> C64 {
        let r = k.rem_euclid(self.l as i64);
        C64::from_polar(1.0, 2.0 * PI * r as f64 / self.l as f64)
    }

    pub fn zeta(&self) -> C64 {
        self.unit(self.m as i64)
    }

    /// `zeta^k`.
    pub fn pow(&self, k: i64) -> C64 {
        self.unit(k * self.m as i64)
    }

    /// `d[l]/d eps` at the root, i.e. `2l / (zeta - zeta^-1)`.
    pub fn lambda_prime(&self) -> C64 {
        let z = self.zeta();
        C64::new(2.0 * self.l as f64, 0.0) / (z - z.inv())
    }

    /// Another `m` coprime to `l`, used to re-run checks on a second root.
    pub fn alternate(&self) -> Self {
        (1..self.l)
            .map(|k| (self.m + k) % self.l)
            .find(|&m| m != 0 && num_integer::gcd(m, self.l) == 1 && m != self.m)
            .map(|m| Self { l: self.l, m })
            .unwrap_or(*self)
    }
}

/// The deformation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum QParam {
    Generic { angle: f64 },
    Root(RootOfUnity),
}

impl QParam {
    /// Generic `q = exp(2 pi i t)`, rejecting rationals with small denominators.
    pub fn generic(angle: f64) -> Result<Self> {
        Self::generic_guarded(angle, DEFAULT_DENOMINATOR_GUARD)
    }

    pub fn generic_guarded(angle: f64, max_denominator: u32) -> Result<Self> {
        if !angle.is_finite() {
            return Err(QgzError::InvalidParameter(format!(
                "angle {angle} is not finite"
            )));
        }
        for den in 1..=max_denominator.max(1) {
            let x = angle * den as f64;
            if (x - x.round()).abs() < 1e-9 {
                return Err(QgzError::InvalidParameter(format!(
                    "angle {angle} is too close to a rational with denominator {den}"
                )));
            }
        }
        Ok(QParam::Generic { angle })
    }

    pub fn default_generic() -> Self {
        QParam::Generic {
            angle: DEFAULT_ANGLE,
        }
    }

    pub fn root(l: u32, m: u32) -> Result<Self> {
        RootOfUnity::new(l, m).map(QParam::Root)
    }

    pub fn point(&self) -> QPoint {
        match *self {
            QParam::Generic { angle } => QPoint::Circle { angle },
            QParam::Root(r) => QPoint::Root(r),
        }
    }

    pub fn q(&self) -> C64 {
        self.point().q()
    }
}

/// A point `q = exp(w)` where q-numbers are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QPoint {
    /// `w = 2 pi i t`.
    Circle { angle: f64 },
    /// `w = 2 pi i m / l`, with exact zeros for `[j l]`.
    Root(RootOfUnity),
    /// Arbitrary `w`.
    Log(C64),
}

impl QPoint {
    /// `q = zeta * exp(eps)`.
    pub fn near_root(root: RootOfUnity, eps: f64) -> Self {
        QPoint::Log(C64::new(eps, root.angle()))
    }

    pub fn log_q(&self) -> C64 {
        match *self {
            QPoint::Circle { angle } => C64::new(0.0, 2.0 * PI * angle),
            QPoint::Root(r) => C64::new(0.0, r.angle()),
            QPoint::Log(w) => w,
        }
    }

    pub fn q(&self) -> C64 {
        match *self {
            QPoint::Root(r) => r.zeta(),
            _ => self.log_q().exp(),
        }
    }

    /// `q^k`.
    pub fn pow(&self, k: i64) -> C64 {
        match *self {
            QPoint::Root(r) => r.pow(k),
            _ => (self.log_q() * k as f64).exp(),
        }
    }

    /// `[n] = (q^n - q^-n) / (q - q^-1)`.
    pub fn q_int(&self, n: i64) -> C64 {
        match *self {
            QPoint::Circle { angle } => {
                let phi = 2.0 * PI * angle;
                C64::new((n as f64 * phi).sin() / phi.sin(), 0.0)
            }
            QPoint::Root(r) => C64::new(root_q_int(r, n), 0.0),
            QPoint::Log(w) => (w * n as f64).sinh() / w.sinh(),
        }
    }

    /// `sqrt([n])` for `n >= 1` on the analytic branch; exactly zero when `[n]` vanishes at a root.
    pub fn sqrt_q_int(&self, n: i64) -> C64 {
        assert!(n >= 1, "sqrt_q_int needs n >= 1, got {n}");
        match *self {
            QPoint::Log(w) => (log_q_int(n, w) * 0.5).exp(),
            _ => {
                let v = self.q_int(n).re;
                if v == 0.0 {
                    return ZERO;
                }
                let arg = log_q_int(n, self.log_q()).im;
                quarter_phase((arg / PI).round() as i64) * v.abs().sqrt()
            }
        }
    }
}

fn root_q_int(r: RootOfUnity, n: i64) -> f64 {
    let l = r.l as i64;
    let k = (n * r.m as i64).rem_euclid(l);
    if k == 0 {
        return 0.0;
    }
    (2.0 * PI * k as f64 / l as f64).sin() / r.angle().sin()
}

/// `i^k`.
pub fn quarter_phase(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Principal `log(1 - e^z)`, accurate for small `|z|` and on `Re z = 0`.
fn log1m_exp(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * half * half;
    let im = x.exp() * y.sin();
    C64::new(-re, -im).ln()
}

/// `log [n]` continued from real positive `w`, for `n >= 1`.
fn log_q_int(n: i64, w: C64) -> C64 {
    w * (n - 1) as f64 + log1m_exp(-2.0 * n as f64 * w) - log1m_exp(-2.0 * w)
}

/// A first-order expansion `value + deriv * eps` around `q = zeta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Jet {
    pub value: C64,
    pub deriv: C64,
}

/// Outcome of [`Jet::checked_div`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JetQuotient {
    Regular(Jet),
    /// Both values vanished; the limit is the ratio of derivatives.
    ResolvedLimit(C64),
}

impl Jet {
    pub fn new(value: C64, deriv: C64) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: C64) -> Self {
        Self { value, deriv: ZERO }
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn scale(self, c: C64) -> Self {
        Self::new(self.value * c, self.deriv * c)
    }

    pub fn checked_div(self, rhs: Jet) -> Result<JetQuotient> {
        if rhs.value != ZERO {
            let v = self.value / rhs.value;
            let d = (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value);
            return Ok(JetQuotient::Regular(Jet::new(v, d)));
        }
        if self.value == ZERO && rhs.deriv != ZERO {
            return Ok(JetQuotient::ResolvedLimit(self.deriv / rhs.deriv));
        }
        Err(QgzError::DivisionByZero(format!("{self:?} / {rhs:?}")))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.deriv)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.value * o.deriv + self.deriv * o.value,
        )
    }
}

/// `[n]` as a jet. At a root the derivative is `d[n]/d eps` along `q = zeta e^eps`.
pub fn q_int(n: i64, q: &QParam) -> Jet {
    match *q {
        QParam::Generic { .. } => Jet::constant(q.point().q_int(n)),
        QParam::Root(r) => {
            let phi = r.angle();
            let v = root_q_int(r, n);
            let k = (n * r.m as i64).rem_euclid(r.l as i64);
            let cos_n = (2.0 * PI * k as f64 / r.l as f64).cos();
            let d = C64::new(n as f64 * cos_n - v * phi.cos(), 0.0) / (I * phi.sin());
            Jet::new(C64::new(v, 0.0), d)
        }
    }
}

/// Principal square root with `sqrt(-r) = i sqrt(r)`.
pub fn principal_sqrt(z: C64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        C64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

pub fn jet_sqrt(x: Jet) -> Result<Jet> {
    if x.value == ZERO {
        return Err(QgzError::ZeroRadicand(format!("{x:?}")));
    }
    let s = principal_sqrt(x.value);
    Ok(Jet::new(s, x.deriv / (2.0 * s)))
}

/// `lim (f(a) - f(b)) / [l]` at the root, given the jets of `f(a)` and `f(b)`.
pub fn d_limit(f_at_a: Jet, f_at_b: Jet, root: &RootOfUnity) -> Result<C64> {
    let scale = 1.0f64.max(f_at_a.value.norm()).max(f_at_b.value.norm());
    if (f_at_a.value - f_at_b.value).norm() > LIMIT_TOL * scale {
        return Err(QgzError::LimitMismatch(format!(
            "values {} and {} do not coincide",
            f_at_a.value, f_at_b.value
        )));
    }
    Ok((f_at_a.deriv - f_at_b.deriv) / root.lambda_prime())
}

/// `coeff * [l]^(half_order / 2)` near the root, with `coeff` a jet whose value is nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootTerm {
    pub coeff: Jet,
    pub half_order: i32,
}

impl RootTerm {
    pub fn constant(c: C64) -> Self {
        Self {
            coeff: Jet::constant(c),
            half_order: 0,
        }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `[l]^(k/2)`.
    pub fn lambda_power(k: i32) -> Self {
        Self {
            coeff: Jet::one(),
            half_order: k,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.value == ZERO
    }

    pub fn scale(self, c: C64) -> Self {
        Self {
            coeff: self.coeff.scale(c),
            half_order: self.half_order,
        }
    }

    /// `1/self`; the value must be nonzero.
    pub fn inv(self) -> Self {
        let v = self.coeff.value;
        Self {
            coeff: Jet::new(v.inv(), -self.coeff.deriv / (v * v)),
            half_order: -self.half_order,
        }
    }

    /// `sqrt([n])` for `n >= 1`, splitting off `sqrt([l])` when `l | n`.
    pub fn sqrt_q_int(n: i64, root: &RootOfUnity) -> Self {
        assert!(n >= 1, "sqrt_q_int needs n >= 1, got {n}");
        let l = root.l as i64;
        if n % l == 0 {
            // sqrt([j l] / [l]) is even in eps, with value (-1)^(m (j-1)) sqrt(j)
            let j = n / l;
            let sign = if (root.m as i64 * (j - 1)) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            return Self {
                coeff: Jet::constant(C64::new(sign * (j as f64).sqrt(), 0.0)),
                half_order: 1,
            };
        }
        let s = QPoint::Root(*root).sqrt_q_int(n);
        let d = q_int(n, &QParam::Root(*root)).deriv;
        Self {
            coeff: Jet::new(s, d / (2.0 * s)),
            half_order: 0,
        }
    }
}

impl Mul for RootTerm {
    type Output = RootTerm;
    fn mul(self, o: RootTerm) -> RootTerm {
        RootTerm {
            coeff: self.coeff * o.coeff,
            half_order: self.half_order + o.half_order,
        }
    }
}

/// A finite sum of [`RootTerm`]s whose limit at the root is taken order by order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootSum {
    terms: Vec<RootTerm>,
}

impl RootSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: RootTerm) {
        if !t.is_zero() {
            self.terms.push(t);
        }
    }

    pub fn terms(&self) -> &[RootTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The most singular order present together with the summed leading jet.
    pub fn leading(&self) -> Option<(i32, Jet)> {
        let k = self.terms.iter().map(|t| t.half_order).min()?;
        let j = self
            .terms
            .iter()
            .filter(|t| t.half_order == k)
            .fold(Jet::zero(), |acc, t| acc + t.coeff);
        Some((k, j))
    }

    /// The value at `q = zeta`. Orders `-1` and `-2` must cancel at leading
    /// order; order `-2` then contributes a derivative term via [`d_limit`].
    pub fn limit(&self, root: &RootOfUnity) -> Result<C64> {
        let mut out = ZERO;
        let mut scale = 0.0f64;
        let min = self.terms.iter().map(|t| t.half_order).min().unwrap_or(0);
        for k in min..=0 {
            let group: Vec<&RootTerm> = self.terms.iter().filter(|t| t.half_order == k).collect();
            if group.is_empty() {
                continue;
            }
            let sum = group.iter().fold(Jet::zero(), |acc, t| acc + t.coeff);
            let mag: f64 = group.iter().map(|t| t.coeff.value.norm()).sum();
            scale = scale.max(mag);
            match k {
                0 => out += sum.value,
                -1 | -2 => {
                    if sum.value.norm() > LIMIT_TOL * mag.max(1.0) {
                        return Err(QgzError::Divergent(format!(
                            "order {k}/2 residue {} (scale {mag})",
                            sum.value
                        )));
                    }
                    if k == -2 {
                        let d = d_limit(sum, Jet::new(sum.value, ZERO), root)?;
                        scale = scale.max(d.norm());
                        out += d;
                    }
                }
                _ => {
                    return Err(QgzError::Divergent(format!(
                        "order {k}/2 exceeds first-order resolution"
                    )))
                }
            }
        }
        if out.norm() <= 1e-12 * scale {
            out = ZERO;
        }
        Ok(out)
    }
}

/// `q^k` for integer `k` on a point, with `q^(k) q^(-k) = 1` exactly at roots.
pub fn q_pow(q: &QParam, k: i64) -> C64 {
    q.point().pow(k)
}

/// Phase of the analytic `sqrt([n])` at a point on the circle, as a multiple of `pi/2`.
pub fn sqrt_phase_quarters(n: i64, point: &QPoint) -> Option<i64> {
    let s = point.sqrt_q_int(n);
    if s == ZERO {
        return None;
    }
    Some((s.arg() / FRAC_PI_2).round() as i64)
}
