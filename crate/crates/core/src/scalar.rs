//! Scalar abstraction letting the same geometry and solver code run on plain
//! `f64` and on [`TaylorPoly`] values.
//!
//! Elementary functions follow `f64` semantics: evaluating outside the domain
//! yields non-finite values rather than an error, so generic callers check
//! `value()` where it matters.

use std::fmt::Debug;
use std::ops::{Add, Div, Index, Mul, Neg, Sub};

use crate::da::TaylorPoly;

pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Constant part (the value itself for `f64`).
    fn value(&self) -> f64;
    /// A constant in the same algebra as `self`.
    fn lift(&self, c: f64) -> Self;
    /// Truncation order (0 for reals).
    fn order(&self) -> usize;
    /// `Σ coeffs[n] (self − value)^n`; for reals only `coeffs[0]` matters.
    fn compose_series(&self, coeffs: &[f64]) -> Self;

    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn asin(&self) -> Self;
    fn acos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn powi(&self, n: u32) -> Self;
    fn recip(&self) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn order(&self) -> usize {
        0
    }
    fn compose_series(&self, coeffs: &[f64]) -> f64 {
        coeffs.first().copied().unwrap_or(0.0)
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn asin(&self) -> f64 {
        f64::asin(*self)
    }
    fn acos(&self) -> f64 {
        f64::acos(*self)
    }
    fn atan2(&self, x: &f64) -> f64 {
        f64::atan2(*self, *x)
    }
    fn powi(&self, n: u32) -> f64 {
        f64::powi(*self, n as i32)
    }
    fn recip(&self) -> f64 {
        1.0 / *self
    }
}

fn nan_like(p: &TaylorPoly) -> TaylorPoly {
    p.constant_like(f64::NAN)
}

impl Scalar for TaylorPoly {
    fn value(&self) -> f64 {
        self.constant_part()
    }
    fn lift(&self, c: f64) -> TaylorPoly {
        self.constant_like(c)
    }
    fn order(&self) -> usize {
        TaylorPoly::order(self)
    }
    fn compose_series(&self, coeffs: &[f64]) -> TaylorPoly {
        TaylorPoly::compose_series(self, coeffs)
    }
    fn sqrt(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Sqrt)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn sin(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Sin)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn cos(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Cos)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn exp(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Exp)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn ln(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Log)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn asin(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Asin)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn acos(&self) -> TaylorPoly {
        self.intrinsic(crate::da::Intrinsic::Acos)
            .unwrap_or_else(|_| nan_like(self))
    }
    fn atan2(&self, x: &TaylorPoly) -> TaylorPoly {
        TaylorPoly::atan2(self, x).unwrap_or_else(|_| nan_like(self))
    }
    fn powi(&self, n: u32) -> TaylorPoly {
        TaylorPoly::powi(self, n)
    }
    fn recip(&self) -> TaylorPoly {
        TaylorPoly::recip(self).unwrap_or_else(|_| nan_like(self))
    }
}

/// Three-component vector over any [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct Vec3<S>(pub [S; 3]);

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3([x, y, z])
    }

    pub fn x(&self) -> &S {
        &self.0[0]
    }
    pub fn y(&self) -> &S {
        &self.0[1]
    }
    pub fn z(&self) -> &S {
        &self.0[2]
    }

    pub fn dot(&self, o: &Vec3<S>) -> S {
        self.0[0].clone() * o.0[0].clone()
            + self.0[1].clone() * o.0[1].clone()
            + self.0[2].clone() * o.0[2].clone()
    }

    pub fn cross(&self, o: &Vec3<S>) -> Vec3<S> {
        let [a0, a1, a2] = &self.0;
        let [b0, b1, b2] = &o.0;
        Vec3([
            a1.clone() * b2.clone() - a2.clone() * b1.clone(),
            a2.clone() * b0.clone() - a0.clone() * b2.clone(),
            a0.clone() * b1.clone() - a1.clone() * b0.clone(),
        ])
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: &S) -> Vec3<S> {
        Vec3(self.0.clone().map(|c| c * s.clone()))
    }

    pub fn scale_f(&self, s: f64) -> Vec3<S> {
        Vec3(self.0.clone().map(|c| c * s))
    }

    pub fn unit(&self) -> Vec3<S> {
        let n = self.norm().recip();
        self.scale(&n)
    }

    pub fn value(&self) -> [f64; 3] {
        [self.0[0].value(), self.0[1].value(), self.0[2].value()]
    }

    /// Adds a real vector.
    pub fn add_f(&self, o: &[f64; 3]) -> Vec3<S> {
        Vec3([
            self.0[0].clone() + o[0],
            self.0[1].clone() + o[1],
            self.0[2].clone() + o[2],
        ])
    }

    pub fn sub_f(&self, o: &[f64; 3]) -> Vec3<S> {
        Vec3([
            self.0[0].clone() - o[0],
            self.0[1].clone() - o[1],
            self.0[2].clone() - o[2],
        ])
    }

    pub fn dot_f(&self, o: &[f64; 3]) -> S {
        self.0[0].clone() * o[0] + self.0[1].clone() * o[1] + self.0[2].clone() * o[2]
    }

    /// Lifts a real vector into the algebra of `like`.
    pub fn lift_from(like: &S, v: [f64; 3]) -> Vec3<S> {
        Vec3(v.map(|c| like.lift(c)))
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Vec3<S>;
    fn add(self, o: Vec3<S>) -> Vec3<S> {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a0 + b0, a1 + b1, a2 + b2])
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Vec3<S>;
    fn sub(self, o: Vec3<S>) -> Vec3<S> {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a0 - b0, a1 - b1, a2 - b2])
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Vec3<S>;
    fn neg(self) -> Vec3<S> {
        Vec3(self.0.map(|c| -c))
    }
}

impl<S> Index<usize> for Vec3<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl From<[f64; 3]> for Vec3<f64> {
    fn from(v: [f64; 3]) -> Self {
        Vec3(v)
    }
}

/// Real 3-vector helpers.
pub mod v3 {
    pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }
    pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }
    pub fn norm(a: &[f64; 3]) -> f64 {
        dot(a, a).sqrt()
    }
    pub fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
        [a[0] * s, a[1] * s, a[2] * s]
    }
    pub fn add(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }
    pub fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
    pub fn unit(a: &[f64; 3]) -> [f64; 3] {
        scale(a, 1.0 / norm(a))
    }
}
