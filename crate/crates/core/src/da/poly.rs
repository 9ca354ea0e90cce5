//! Multivariate truncated power series.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use super::interval::RealInterval;
use super::space::{basis, Basis};
use super::DaError;

/// Coefficients smaller than this are flushed to zero on canonicalization.
const FLUSH: f64 = 1e-300;

/// A polynomial in `v` deviation variables truncated at total degree `k`.
///
/// Coefficients are stored densely in the graded enumeration of [`Basis`].
#[derive(Clone)]
pub struct TaylorPoly {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

/// Elementary functions available through [`TaylorPoly::intrinsic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intrinsic {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Sqrt,
    Exp,
    Log,
    Pow(f64),
}

/// Binary operations available through [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Right-hand operand of [`arith`].
#[derive(Debug, Clone)]
pub enum Operand<'a> {
    Poly(&'a TaylorPoly),
    Real(f64),
}

impl TaylorPoly {
    /// The zero polynomial in `(num_vars, order)`.
    pub fn zero(num_vars: usize, order: usize) -> Result<TaylorPoly, DaError> {
        if num_vars == 0 || order == 0 {
            return Err(DaError::InvalidSpace { num_vars, order });
        }
        let b = basis(num_vars, order);
        let n = b.len();
        Ok(TaylorPoly {
            basis: b,
            coeffs: vec![0.0; n],
        })
    }

    pub(crate) fn zero_in(basis: &Arc<Basis>) -> TaylorPoly {
        TaylorPoly {
            basis: basis.clone(),
            coeffs: vec![0.0; basis.len()],
        }
    }

    /// `constant + scale * dx_{var_index}`.
    pub fn variable(
        constant: f64,
        var_index: usize,
        scale: f64,
        num_vars: usize,
        order: usize,
    ) -> Result<TaylorPoly, DaError> {
        if var_index >= num_vars {
            return Err(DaError::VariableOutOfRange {
                index: var_index,
                num_vars,
            });
        }
        if !constant.is_finite() || !scale.is_finite() {
            return Err(DaError::NonFinite);
        }
        let mut p = TaylorPoly::zero(num_vars, order)?;
        p.coeffs[0] = constant;
        p.coeffs[p.basis.var_index(var_index)] = scale;
        p.canonicalize();
        Ok(p)
    }

    /// A constant living in the same space as `self`.
    pub fn constant_like(&self, value: f64) -> TaylorPoly {
        let mut p = TaylorPoly::zero_in(&self.basis);
        p.coeffs[0] = value;
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` terms.
    pub fn from_terms(
        num_vars: usize,
        order: usize,
        terms: &[(Vec<u8>, f64)],
    ) -> Result<TaylorPoly, DaError> {
        let mut p = TaylorPoly::zero(num_vars, order)?;
        for (exps, c) in terms {
            if exps.len() != num_vars {
                return Err(DaError::BadExponent(exps.clone()));
            }
            if !c.is_finite() {
                return Err(DaError::NonFinite);
            }
            let idx = p
                .basis
                .index_of(exps)
                .ok_or_else(|| DaError::BadExponent(exps.clone()))?;
            p.coeffs[idx] += c;
        }
        p.canonicalize();
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.basis.num_vars()
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    /// Dense coefficients in basis order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn constant_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.basis.index_of(exps).map_or(0.0, |i| self.coeffs[i])
    }

    /// Non-zero terms as `(exponents, coefficient)` in basis order.
    pub fn terms(&self) -> Vec<(Vec<u8>, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (self.basis.exponents(i).to_vec(), *c))
            .collect()
    }

    pub fn same_space(&self, other: &TaylorPoly) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            || (self.num_vars() == other.num_vars() && self.order() == other.order())
    }

    fn check_space(&self, other: &TaylorPoly) -> Result<(), DaError> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(DaError::SpaceMismatch {
                left: (self.num_vars(), self.order()),
                right: (other.num_vars(), other.order()),
            })
        }
    }

    pub(crate) fn canonicalize(&mut self) {
        for c in &mut self.coeffs {
            if c.abs() < FLUSH {
                *c = 0.0;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Copy with the constant term removed.
    pub fn nonconstant_part(&self) -> TaylorPoly {
        let mut p = self.clone();
        p.coeffs[0] = 0.0;
        p
    }

    /// Copy with all terms of degree 0 and 1 removed.
    pub fn nonlinear_part(&self) -> TaylorPoly {
        let mut p = self.clone();
        let end = self.basis.degree_range(1).end;
        p.coeffs[..end].iter_mut().for_each(|c| *c = 0.0);
        p
    }

    /// Terms of exactly degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> TaylorPoly {
        let mut p = TaylorPoly::zero_in(&self.basis);
        if d <= self.order() {
            let r = self.basis.degree_range(d);
            p.coeffs[r.clone()].copy_from_slice(&self.coeffs[r]);
        }
        p
    }

    /// Largest absolute coefficient.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Re-expresses the polynomial at a lower truncation order.
    pub fn truncate(&self, order: usize) -> Result<TaylorPoly, DaError> {
        let mut p = TaylorPoly::zero(self.num_vars(), order)?;
        let n = p.basis.len().min(self.basis.len());
        p.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Ok(p)
    }

    /// Re-expresses the polynomial in a space with at least as many
    /// variables; new variables are appended after the existing ones.
    pub fn embed(&self, num_vars: usize, order: usize) -> Result<TaylorPoly, DaError> {
        if num_vars < self.num_vars() {
            return Err(DaError::SpaceMismatch {
                left: (self.num_vars(), self.order()),
                right: (num_vars, order),
            });
        }
        let mut p = TaylorPoly::zero(num_vars, order)?;
        let mut exps = vec![0u8; num_vars];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 || self.basis.degree(i) > order {
                continue;
            }
            exps[..self.num_vars()].copy_from_slice(self.basis.exponents(i));
            let j = p.basis.index_of(&exps).unwrap();
            p.coeffs[j] = c;
        }
        Ok(p)
    }

    fn add_poly(&self, rhs: &TaylorPoly) -> TaylorPoly {
        let mut out = self.clone();
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o += r;
        }
        out.canonicalize();
        out
    }

    fn sub_poly(&self, rhs: &TaylorPoly) -> TaylorPoly {
        let mut out = self.clone();
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o -= r;
        }
        out.canonicalize();
        out
    }

    fn mul_poly(&self, rhs: &TaylorPoly) -> TaylorPoly {
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &(j, t) in self.basis.product_row(i) {
                let b = rhs.coeffs[j as usize];
                out[t as usize] += a * b;
            }
        }
        let mut p = TaylorPoly {
            basis: self.basis.clone(),
            coeffs: out,
        };
        p.canonicalize();
        p
    }

    fn scale(&self, s: f64) -> TaylorPoly {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out.canonicalize();
        out
    }

    /// `Σ_n coeffs[n] * (self - c0)^n` with `c0` the constant part.
    ///
    /// This is how every elementary function is evaluated: the caller
    /// supplies the univariate Taylor coefficients of `f` about `c0`, and the
    /// nilpotent remainder is substituted by Horner's scheme. Coefficients
    /// beyond the truncation order are ignored.
    pub fn compose_series(&self, coeffs: &[f64]) -> TaylorPoly {
        let h = self.nonconstant_part();
        let top = coeffs.len().min(self.order() + 1);
        if top == 0 {
            return self.constant_like(0.0);
        }
        let mut acc = self.constant_like(coeffs[top - 1]);
        for n in (0..top - 1).rev() {
            acc = acc.mul_poly(&h);
            acc.coeffs[0] += coeffs[n];
        }
        acc.canonicalize();
        acc
    }

    /// Multiplicative inverse; the constant part must be non-zero.
    pub fn recip(&self) -> Result<TaylorPoly, DaError> {
        let c = self.constant_part();
        if c == 0.0 {
            return Err(DaError::DivisionByZero);
        }
        let k = self.order();
        // 1/(c+h) = Σ (-1)^n h^n / c^(n+1)
        let coeffs: Vec<f64> = (0..=k)
            .map(|n| {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                s / c.powi(n as i32 + 1)
            })
            .collect();
        Ok(self.compose_series(&coeffs))
    }

    /// Applies an elementary function, checking its domain at the expansion point.
    pub fn intrinsic(&self, f: Intrinsic) -> Result<TaylorPoly, DaError> {
        let c = self.constant_part();
        let k = self.order();
        let domain = |ok: bool, name: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(DaError::Domain { function: name, value: c })
            }
        };
        match f {
            Intrinsic::Sin => Ok(self.compose_series(&sin_cos_coeffs(c, k, false))),
            Intrinsic::Cos => Ok(self.compose_series(&sin_cos_coeffs(c, k, true))),
            Intrinsic::Tan => {
                domain(c.cos() != 0.0, "tan")?;
                let s = self.compose_series(&sin_cos_coeffs(c, k, false));
                let co = self.compose_series(&sin_cos_coeffs(c, k, true));
                Ok(s.mul_poly(&co.recip()?))
            }
            Intrinsic::Exp => {
                let e = c.exp();
                let mut coeffs = Vec::with_capacity(k + 1);
                let mut fact = 1.0;
                for n in 0..=k {
                    if n > 0 {
                        fact *= n as f64;
                    }
                    coeffs.push(e / fact);
                }
                Ok(self.compose_series(&coeffs))
            }
            Intrinsic::Log => {
                domain(c > 0.0, "log")?;
                let mut coeffs = vec![c.ln()];
                for n in 1..=k {
                    let s = if n % 2 == 1 { 1.0 } else { -1.0 };
                    coeffs.push(s / (n as f64 * c.powi(n as i32)));
                }
                Ok(self.compose_series(&coeffs))
            }
            Intrinsic::Sqrt => {
                domain(c > 0.0, "sqrt")?;
                Ok(self.compose_series(&pow_coeffs(c, 0.5, k)))
            }
            Intrinsic::Pow(p) => {
                if p.fract() == 0.0 && p >= 0.0 {
                    return Ok(self.powi(p as u32));
                }
                domain(c > 0.0, "pow")?;
                Ok(self.compose_series(&pow_coeffs(c, p, k)))
            }
            Intrinsic::Atan => Ok(self.atan_unchecked()),
            Intrinsic::Asin => {
                domain(c.abs() < 1.0, "asin")?;
                let root = (self.constant_like(1.0) - self.clone() * self.clone())
                    .intrinsic(Intrinsic::Sqrt)?;
                Ok(self.atan2_unchecked(&root))
            }
            Intrinsic::Acos => {
                domain(c.abs() < 1.0, "acos")?;
                let root = (self.constant_like(1.0) - self.clone() * self.clone())
                    .intrinsic(Intrinsic::Sqrt)?;
                Ok(root.atan2_unchecked(self))
            }
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: u32) -> TaylorPoly {
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_poly(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_poly(&base);
            }
        }
        result
    }

    pub(crate) fn atan_unchecked(&self) -> TaylorPoly {
        // atan(c + h) = atan(c) + atan(h / (1 + c (c + h)))
        let c = self.constant_part();
        let h = self.nonconstant_part();
        let denom = self.scale(c) + 1.0;
        let u = h.mul_poly(&denom.recip().expect("1 + c^2 + c h has positive constant"));
        let mut series = atan_series(self.order());
        series[0] = c.atan();
        u.compose_series_about_zero(&series)
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(&self, x: &TaylorPoly) -> Result<TaylorPoly, DaError> {
        self.check_space(x)?;
        if self.constant_part() == 0.0 && x.constant_part() == 0.0 {
            return Err(DaError::Domain {
                function: "atan2",
                value: 0.0,
            });
        }
        Ok(self.atan2_unchecked(x))
    }

    pub(crate) fn atan2_unchecked(&self, x: &TaylorPoly) -> TaylorPoly {
        // atan2(y, x) = θ0 + atan((x0 y - y0 x) / (x0 x + y0 y)), and the
        // numerator has no constant part
        let y0 = self.constant_part();
        let x0 = x.constant_part();
        let theta = y0.atan2(x0);
        let num = self.scale(x0).sub_poly(&x.scale(y0));
        let den = x.scale(x0).add_poly(&self.scale(y0));
        let u = match den.recip() {
            Ok(r) => num.mul_poly(&r),
            Err(_) => return self.constant_like(f64::NAN),
        };
        let mut series = atan_series(self.order());
        series[0] = theta;
        u.compose_series_about_zero(&series)
    }

    /// Like [`compose_series`](Self::compose_series) but for a polynomial
    /// already known to have zero constant part.
    fn compose_series_about_zero(&self, coeffs: &[f64]) -> TaylorPoly {
        debug_assert!(self.constant_part().abs() < 1e-12 || !self.is_finite());
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        h.compose_series(coeffs)
    }

    /// Partial derivative with respect to `var`, kept in the same `(v, k)`.
    pub fn partial_deriv(&self, var: usize) -> Result<TaylorPoly, DaError> {
        if var >= self.num_vars() {
            return Err(DaError::VariableOutOfRange {
                index: var,
                num_vars: self.num_vars(),
            });
        }
        let mut out = TaylorPoly::zero_in(&self.basis);
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if let Some(q) = self.basis.quotient(idx, var) {
                let e = self.basis.exponents(idx)[var] as f64;
                out.coeffs[q] += c * e;
            }
        }
        Ok(out)
    }

    /// Evaluates the polynomial at a point.
    pub fn eval(&self, point: &[f64]) -> Result<f64, DaError> {
        if point.len() != self.num_vars() {
            return Err(DaError::DimensionMismatch {
                expected: self.num_vars(),
                found: point.len(),
            });
        }
        let vals = self.basis.monomial_values(point);
        Ok(self.dot_monomials(&vals))
    }

    pub(crate) fn dot_monomials(&self, vals: &[f64]) -> f64 {
        self.coeffs.iter().zip(vals).map(|(c, m)| c * m).sum()
    }

    /// Guaranteed enclosure of the range over `domain` by monomial-wise
    /// interval arithmetic.
    pub fn bound(&self, domain: &[RealInterval]) -> Result<RealInterval, DaError> {
        if domain.len() != self.num_vars() {
            return Err(DaError::DimensionMismatch {
                expected: self.num_vars(),
                found: domain.len(),
            });
        }
        let mut lo = 0.0;
        let mut hi = 0.0;
        let mut magnitude = 0.0;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut term = RealInterval::point(c);
            for (var, &e) in self.basis.exponents(idx).iter().enumerate() {
                if e > 0 {
                    term = term.mul(&domain[var].powi(e as u32));
                }
            }
            lo += term.lo;
            hi += term.hi;
            magnitude += term.lo.abs().max(term.hi.abs());
        }
        // outward rounding slack for the floating-point sums above
        let slack = magnitude * 8.0 * f64::EPSILON;
        Ok(RealInterval::new(lo - slack, hi + slack).expect("ordered finite bounds"))
    }

    /// Bound over the unit box `[-1, 1]^v`.
    pub fn bound_unit(&self) -> RealInterval {
        self.bound(&vec![RealInterval::unit(); self.num_vars()])
            .expect("box matches num_vars")
    }

    /// Sum of absolute coefficients of the top-degree terms.
    pub fn top_order_mass(&self) -> f64 {
        self.coeffs[self.basis.degree_range(self.order())]
            .iter()
            .map(|c| c.abs())
            .sum()
    }

    /// Linear substitution `dx_i -> center_i + half_width_i * dx_i`.
    ///
    /// Exact re-expansion of the polynomial about a new point with rescaled
    /// variables; used to restrict a map to a sub-box.
    pub fn rescale(&self, center: &[f64], half_width: &[f64]) -> Result<TaylorPoly, DaError> {
        let v = self.num_vars();
        if center.len() != v || half_width.len() != v {
            return Err(DaError::DimensionMismatch {
                expected: v,
                found: center.len().min(half_width.len()),
            });
        }
        let inner: Vec<TaylorPoly> = (0..v)
            .map(|i| TaylorPoly::variable(center[i], i, half_width[i], v, self.order()))
            .collect::<Result<_, _>>()?;
        Ok(super::map::compose_polys(std::slice::from_ref(self), &inner)?.remove(0))
    }
}

fn sin_cos_coeffs(c: f64, k: usize, cosine: bool) -> Vec<f64> {
    let (s, co) = c.sin_cos();
    // n-th derivative of sin at c cycles through sin, cos, -sin, -cos
    let cycle = if cosine { [co, -s, -co, s] } else { [s, co, -s, -co] };
    let mut fact = 1.0;
    (0..=k)
        .map(|n| {
            if n > 0 {
                fact *= n as f64;
            }
            cycle[n % 4] / fact
        })
        .collect()
}

fn pow_coeffs(c: f64, p: f64, k: usize) -> Vec<f64> {
    // (c + h)^p = c^p Σ binom(p, n) (h / c)^n
    let mut out = Vec::with_capacity(k + 1);
    let base = c.powf(p);
    let mut binom = 1.0;
    for n in 0..=k {
        if n > 0 {
            binom *= (p - (n as f64 - 1.0)) / n as f64;
        }
        out.push(base * binom / c.powi(n as i32));
    }
    out
}

fn atan_series(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|n| {
            if n % 2 == 0 {
                0.0
            } else if (n / 2) % 2 == 0 {
                1.0 / n as f64
            } else {
                -1.0 / n as f64
            }
        })
        .collect()
}

/// Fallible binary operation; operands must share `(v, k)`.
pub fn arith(a: &TaylorPoly, b: Operand<'_>, op: ArithOp) -> Result<TaylorPoly, DaError> {
    match b {
        Operand::Poly(b) => {
            a.check_space(b)?;
            Ok(match op {
                ArithOp::Add => a.add_poly(b),
                ArithOp::Sub => a.sub_poly(b),
                ArithOp::Mul => a.mul_poly(b),
                ArithOp::Div => a.mul_poly(&b.recip()?),
            })
        }
        Operand::Real(r) => {
            if !r.is_finite() {
                return Err(DaError::NonFinite);
            }
            Ok(match op {
                ArithOp::Add => {
                    let mut p = a.clone();
                    p.coeffs[0] += r;
                    p
                }
                ArithOp::Sub => {
                    let mut p = a.clone();
                    p.coeffs[0] -= r;
                    p
                }
                ArithOp::Mul => a.scale(r),
                ArithOp::Div => {
                    if r == 0.0 {
                        return Err(DaError::DivisionByZero);
                    }
                    a.scale(1.0 / r)
                }
            })
        }
    }
}

impl PartialEq for TaylorPoly {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.coeffs == other.coeffs
    }
}

impl fmt::Debug for TaylorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TaylorPoly(v={}, k={}; ", self.num_vars(), self.order())?;
        let mut first = true;
        for (exps, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:e}{exps:?}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for TaylorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

// Operator overloads panic on (v, k) mismatch and turn numeric failures into
// a NaN constant so they surface like f64 arithmetic; `arith` is the
// fallible form.
fn settle(a: &TaylorPoly, r: Result<TaylorPoly, DaError>) -> TaylorPoly {
    match r {
        Ok(p) => p,
        Err(e @ (DaError::SpaceMismatch { .. } | DaError::InvalidSpace { .. })) => {
            panic!("TaylorPoly operator: {e}")
        }
        Err(_) => a.constant_like(f64::NAN),
    }
}

macro_rules! poly_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait<TaylorPoly> for TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: TaylorPoly) -> TaylorPoly {
                settle(&self, arith(&self, Operand::Poly(&rhs), $op))
            }
        }
        impl<'a> $trait<&'a TaylorPoly> for &'a TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: &'a TaylorPoly) -> TaylorPoly {
                settle(self, arith(self, Operand::Poly(rhs), $op))
            }
        }
        impl $trait<f64> for TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: f64) -> TaylorPoly {
                settle(&self, arith(&self, Operand::Real(rhs), $op))
            }
        }
        impl<'a> $trait<f64> for &'a TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: f64) -> TaylorPoly {
                settle(self, arith(self, Operand::Real(rhs), $op))
            }
        }
    };
}

poly_binop!(Add, add, ArithOp::Add);
poly_binop!(Sub, sub, ArithOp::Sub);
poly_binop!(Mul, mul, ArithOp::Mul);
poly_binop!(Div, div, ArithOp::Div);

impl Add<TaylorPoly> for f64 {
    type Output = TaylorPoly;
    fn add(self, rhs: TaylorPoly) -> TaylorPoly {
        rhs + self
    }
}

impl Sub<TaylorPoly> for f64 {
    type Output = TaylorPoly;
    fn sub(self, rhs: TaylorPoly) -> TaylorPoly {
        -rhs + self
    }
}

impl Mul<TaylorPoly> for f64 {
    type Output = TaylorPoly;
    fn mul(self, rhs: TaylorPoly) -> TaylorPoly {
        rhs * self
    }
}

impl Neg for TaylorPoly {
    type Output = TaylorPoly;
    fn neg(self) -> TaylorPoly {
        self.scale(-1.0)
    }
}

impl Neg for &TaylorPoly {
    type Output = TaylorPoly;
    fn neg(self) -> TaylorPoly {
        self.scale(-1.0)
    }
}

impl AddAssign<&TaylorPoly> for TaylorPoly {
    fn add_assign(&mut self, rhs: &TaylorPoly) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&TaylorPoly> for TaylorPoly {
    fn sub_assign(&mut self, rhs: &TaylorPoly) {
        *self = &*self - rhs;
    }
}

impl MulAssign<f64> for TaylorPoly {
    fn mul_assign(&mut self, rhs: f64) {
        *self = self.scale(rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn x(c: f64, scale: f64, k: usize) -> TaylorPoly {
        TaylorPoly::variable(c, 0, scale, 1, k).unwrap()
    }

    fn coeffs1(p: &TaylorPoly) -> Vec<f64> {
        p.coeffs().to_vec()
    }

    #[test]
    fn init_is_affine() {
        let p = x(5.0, 0.1, 2);
        assert_eq!(coeffs1(&p), vec![5.0, 0.1, 0.0]);
        let q = TaylorPoly::variable(0.0, 2, 1.0, 3, 4).unwrap();
        assert_eq!(q.terms(), vec![(vec![0, 0, 1], 1.0)]);
        let sq = x(1.0, 2.0, 3).powi(2);
        assert_eq!(coeffs1(&sq), vec![1.0, 4.0, 4.0, 0.0]);
        assert!(matches!(
            TaylorPoly::variable(0.0, 3, 1.0, 3, 2),
            Err(DaError::VariableOutOfRange { .. })
        ));
        assert!(matches!(
            TaylorPoly::variable(f64::NAN, 0, 1.0, 1, 2),
            Err(DaError::NonFinite)
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let a = x(1.0, 1.0, 2);
        let b = x(1.0, -1.0, 2);
        assert_eq!(coeffs1(&(a * b)), vec![1.0, 0.0, -1.0]);

        let inv = x(1.0, 1.0, 3).recip().unwrap();
        assert_eq!(coeffs1(&inv), vec![1.0, -1.0, 1.0, -1.0]);

        let t = x(2.0, 1.0, 4);
        let one = arith(&t, Operand::Poly(&t), ArithOp::Div).unwrap();
        for (i, c) in one.coeffs().iter().enumerate() {
            assert_abs_diff_eq!(*c, if i == 0 { 1.0 } else { 0.0 }, epsilon = 1e-15);
        }

        let z = x(0.0, 1.0, 4);
        assert!(matches!(
            arith(&t, Operand::Poly(&z), ArithOp::Div),
            Err(DaError::DivisionByZero)
        ));
        let other = TaylorPoly::variable(0.0, 0, 1.0, 2, 3).unwrap();
        assert!(matches!(
            arith(&t, Operand::Poly(&other), ArithOp::Add),
            Err(DaError::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn intrinsic_examples() {
        let s = x(0.0, 1.0, 3).intrinsic(Intrinsic::Sin).unwrap();
        assert_abs_diff_eq!(s.coeffs()[1], 1.0);
        assert_abs_diff_eq!(s.coeffs()[2], 0.0);
        assert_abs_diff_eq!(s.coeffs()[3], -1.0 / 6.0, epsilon = 1e-16);

        let r = x(1.0, 1.0, 2).intrinsic(Intrinsic::Sqrt).unwrap();
        assert_eq!(coeffs1(&r), vec![1.0, 0.5, -0.125]);

        let el = x(1.0, 1.0, 5)
            .intrinsic(Intrinsic::Log)
            .unwrap()
            .intrinsic(Intrinsic::Exp)
            .unwrap();
        let expect = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        for (c, e) in el.coeffs().iter().zip(expect) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-14);
        }

        assert!(x(-1.0, 1.0, 2).intrinsic(Intrinsic::Sqrt).is_err());
        assert!(x(1.5, 1.0, 2).intrinsic(Intrinsic::Asin).is_err());
        assert!(x(0.0, 1.0, 2).intrinsic(Intrinsic::Log).is_err());
    }

    #[test]
    fn inverse_trig_match_derivatives() {
        // asin'(x) = 1/sqrt(1-x^2), acos' = -asin', atan'(x) = 1/(1+x^2)
        let c = 0.3;
        let p = x(c, 1.0, 3);
        let asin = p.intrinsic(Intrinsic::Asin).unwrap();
        assert_abs_diff_eq!(asin.constant_part(), c.asin(), epsilon = 1e-15);
        assert_abs_diff_eq!(asin.coeffs()[1], 1.0 / (1.0 - c * c).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(asin.coeffs()[2], c / (1.0 - c * c).powf(1.5) / 2.0, epsilon = 1e-14);
        let acos = p.intrinsic(Intrinsic::Acos).unwrap();
        assert_abs_diff_eq!(acos.constant_part(), c.acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(acos.coeffs()[1], -1.0 / (1.0 - c * c).sqrt(), epsilon = 1e-14);
        let atan = p.intrinsic(Intrinsic::Atan).unwrap();
        assert_abs_diff_eq!(atan.coeffs()[1], 1.0 / (1.0 + c * c), epsilon = 1e-15);
        assert_abs_diff_eq!(atan.coeffs()[2], -c / (1.0 + c * c).powi(2), epsilon = 1e-15);
        let tan = p.intrinsic(Intrinsic::Tan).unwrap();
        assert_abs_diff_eq!(tan.coeffs()[1], 1.0 / c.cos().powi(2), epsilon = 1e-14);
    }

    #[test]
    fn atan2_all_quadrants() {
        for &(y, xx) in &[(1.0, 2.0), (1.0, -2.0), (-1.0, -2.0), (-1.0, 2.0), (0.0, -1.0)] {
            let yp = TaylorPoly::variable(y, 0, 1.0, 2, 3).unwrap();
            let xp = TaylorPoly::variable(xx, 1, 1.0, 2, 3).unwrap();
            let a = yp.atan2(&xp).unwrap();
            assert_abs_diff_eq!(a.constant_part(), f64::atan2(y, xx), epsilon = 1e-15);
            let r2 = y * y + xx * xx;
            assert_abs_diff_eq!(a.coeff(&[1, 0]), xx / r2, epsilon = 1e-14);
            assert_abs_diff_eq!(a.coeff(&[0, 1]), -y / r2, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_examples() {
        let sq = TaylorPoly::from_terms(2, 3, &[(vec![2, 0], 1.0)]).unwrap();
        assert_eq!(sq.partial_deriv(0).unwrap().terms(), vec![(vec![1, 0], 2.0)]);
        assert!(sq.partial_deriv(1).unwrap().terms().is_empty());
        assert!(sq.partial_deriv(2).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(x(1.0, 2.0, 2).eval(&[0.0]).unwrap(), 1.0);
        let p = TaylorPoly::from_terms(1, 2, &[(vec![0], 1.0), (vec![1], 2.0), (vec![2], 1.0)])
            .unwrap();
        assert_eq!(p.eval(&[0.5]).unwrap(), 2.25);
        assert!(p.eval(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn bound_examples() {
        let lin = x(1.0, 2.0, 2);
        let b = lin.bound_unit();
        assert!(b.lo <= -1.0 && b.hi >= 3.0);
        assert!(b.lo > -1.0 - 1e-12 && b.hi < 3.0 + 1e-12);
        let sq = TaylorPoly::from_terms(1, 2, &[(vec![2], 1.0)]).unwrap();
        let b = sq.bound_unit();
        assert!(b.lo <= 0.0 && b.hi >= 1.0);
    }

    #[test]
    fn top_order_mass_examples() {
        assert_eq!(x(1.0, 1.0, 4).top_order_mass(), 0.0);
        let p = TaylorPoly::from_terms(1, 4, &[(vec![4], 1.0)]).unwrap();
        assert_eq!(p.top_order_mass(), 1.0);
        let q = TaylorPoly::from_terms(2, 4, &[(vec![4, 0], 2.0), (vec![2, 2], -3.0)]).unwrap();
        assert_eq!(q.top_order_mass(), 5.0);
    }

    #[test]
    fn rescale_matches_pointwise() {
        let p = TaylorPoly::from_terms(
            2,
            3,
            &[(vec![0, 0], 1.0), (vec![1, 1], 2.0), (vec![3, 0], -1.5), (vec![0, 2], 0.7)],
        )
        .unwrap();
        let center = [0.5, -0.25];
        let hw = [0.5, 0.25];
        let r = p.rescale(&center, &hw).unwrap();
        for &(u, v) in &[(0.0, 0.0), (1.0, -1.0), (-0.3, 0.8)] {
            let direct = p.eval(&[center[0] + hw[0] * u, center[1] + hw[1] * v]).unwrap();
            assert_abs_diff_eq!(r.eval(&[u, v]).unwrap(), direct, epsilon = 1e-14);
        }
    }
}
