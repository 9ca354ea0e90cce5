//! Vector-valued Taylor maps: composition, inversion, evaluation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::interval::RealInterval;
use super::poly::TaylorPoly;
use super::DaError;

/// An ordered list of polynomials sharing one `(v, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorMap {
    outputs: Vec<TaylorPoly>,
}

impl TaylorMap {
    pub fn new(outputs: Vec<TaylorPoly>) -> Result<TaylorMap, DaError> {
        let first = outputs.first().ok_or(DaError::EmptyMap)?;
        for p in &outputs[1..] {
            if !p.same_space(first) {
                return Err(DaError::SpaceMismatch {
                    left: (first.num_vars(), first.order()),
                    right: (p.num_vars(), p.order()),
                });
            }
        }
        Ok(TaylorMap { outputs })
    }

    /// `dx_i -> dx_i` for every variable.
    pub fn identity(num_vars: usize, order: usize) -> Result<TaylorMap, DaError> {
        let outputs = (0..num_vars)
            .map(|i| TaylorPoly::variable(0.0, i, 1.0, num_vars, order))
            .collect::<Result<Vec<_>, _>>()?;
        TaylorMap::new(outputs)
    }

    pub fn outputs(&self) -> &[TaylorPoly] {
        &self.outputs
    }

    pub fn into_outputs(self) -> Vec<TaylorPoly> {
        self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.outputs[0].num_vars()
    }

    pub fn order(&self) -> usize {
        self.outputs[0].order()
    }

    pub fn constant_part(&self) -> Vec<f64> {
        self.outputs.iter().map(|p| p.constant_part()).collect()
    }

    /// Jacobian at the expansion point (rows: outputs, columns: variables).
    pub fn linear_part(&self) -> DMatrix<f64> {
        let v = self.num_vars();
        DMatrix::from_fn(self.len(), v, |r, c| self.outputs[r].coeffs()[1 + c])
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, DaError> {
        if point.len() != self.num_vars() {
            return Err(DaError::DimensionMismatch {
                expected: self.num_vars(),
                found: point.len(),
            });
        }
        let vals = self.outputs[0].basis().monomial_values(point);
        Ok(self.outputs.iter().map(|p| p.dot_monomials(&vals)).collect())
    }

    pub fn bound(&self, domain: &[RealInterval]) -> Result<Vec<RealInterval>, DaError> {
        self.outputs.iter().map(|p| p.bound(domain)).collect()
    }

    /// `self ∘ inner`: substitutes the outputs of `inner` for the variables of `self`.
    ///
    /// Composition of truncated polynomials is exact up to order `k` when
    /// `inner` has zero constant parts. A non-zero inner constant is also
    /// accepted: the outer polynomial is then re-expanded about the shifted
    /// point, which is exact for the truncated outer polynomial itself.
    pub fn compose(&self, inner: &TaylorMap) -> Result<TaylorMap, DaError> {
        TaylorMap::new(compose_polys(&self.outputs, &inner.outputs)?)
    }

    /// Order-by-order inverse of an origin-preserving square map.
    ///
    /// With `M = L + N` (linear and nonlinear parts), the inverse satisfies
    /// `X = L⁻¹ (I − N ∘ X)`; starting from `X = L⁻¹` each pass fixes one
    /// more order, so `k` passes reach the truncation order.
    pub fn invert(&self) -> Result<TaylorMap, DaError> {
        let v = self.num_vars();
        let k = self.order();
        if self.len() != v {
            return Err(DaError::NotSquare {
                outputs: self.len(),
                num_vars: v,
            });
        }
        let offset = self.constant_part().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if offset != 0.0 {
            return Err(DaError::NotOriginPreserving(offset));
        }
        let lin = self.linear_part();
        let svd = lin.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition < 1e14) {
            return Err(DaError::SingularLinearPart { condition });
        }
        let lin_inv = lin
            .try_inverse()
            .ok_or(DaError::SingularLinearPart { condition })?;

        let nonlinear: Vec<TaylorPoly> = self
            .outputs
            .iter()
            .map(|p| p.nonlinear_part())
            .collect();
        let identity = TaylorMap::identity(v, k)?;
        let apply_lin_inv = |rhs: &[TaylorPoly]| -> Vec<TaylorPoly> {
            (0..v)
                .map(|r| {
                    let mut acc = TaylorPoly::zero_in(rhs[0].basis());
                    for c in 0..v {
                        let w = lin_inv[(r, c)];
                        if w != 0.0 {
                            acc += &(&rhs[c] * w);
                        }
                    }
                    acc
                })
                .collect()
        };
        let mut x = apply_lin_inv(identity.outputs());
        for _ in 1..k {
            let nx = compose_polys(&nonlinear, &x)?;
            let rhs: Vec<TaylorPoly> = identity
                .outputs()
                .iter()
                .zip(&nx)
                .map(|(i, n)| i - n)
                .collect();
            x = apply_lin_inv(&rhs);
        }
        TaylorMap::new(x)
    }

    /// Lower-order copy of every output.
    pub fn truncate(&self, order: usize) -> Result<TaylorMap, DaError> {
        TaylorMap::new(
            self.outputs
                .iter()
                .map(|p| p.truncate(order))
                .collect::<Result<_, _>>()?,
        )
    }

    /// Documented JSON-friendly form: `(v, k)` header plus sparse terms per output.
    pub fn to_serial(&self) -> SerialMap {
        SerialMap {
            num_vars: self.num_vars(),
            order: self.order(),
            outputs: self
                .outputs
                .iter()
                .map(|p| {
                    p.terms()
                        .into_iter()
                        .map(|(exponents, coeff)| SerialTerm { exponents, coeff })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_serial(s: &SerialMap) -> Result<TaylorMap, DaError> {
        let outputs = s
            .outputs
            .iter()
            .map(|terms| {
                let t: Vec<(Vec<u8>, f64)> =
                    terms.iter().map(|t| (t.exponents.clone(), t.coeff)).collect();
                TaylorPoly::from_terms(s.num_vars, s.order, &t)
            })
            .collect::<Result<Vec<_>, _>>()?;
        TaylorMap::new(outputs)
    }
}

/// Substitutes `inner` into each polynomial of `outer`.
pub(crate) fn compose_polys(
    outer: &[TaylorPoly],
    inner: &[TaylorPoly],
) -> Result<Vec<TaylorPoly>, DaError> {
    let first = outer.first().ok_or(DaError::EmptyMap)?;
    let inner_first = inner.first().ok_or(DaError::EmptyMap)?;
    if inner.len() != first.num_vars() {
        return Err(DaError::DimensionMismatch {
            expected: first.num_vars(),
            found: inner.len(),
        });
    }
    let ob = first.basis().clone();
    let max_deg = (0..ob.len())
        .filter(|&i| outer.iter().any(|p| p.coeffs()[i] != 0.0))
        .map(|i| ob.degree(i))
        .max()
        .unwrap_or(0);
    // monomials of the outer basis evaluated on the inner polynomials
    let mut mono: Vec<TaylorPoly> = Vec::with_capacity(ob.len());
    let mut out: Vec<TaylorPoly> = outer
        .iter()
        .map(|_| TaylorPoly::zero_in(inner_first.basis()))
        .collect();
    for idx in 0..ob.len() {
        if ob.degree(idx) > max_deg {
            break;
        }
        let m = if idx == 0 {
            inner_first.constant_like(1.0)
        } else {
            let (parent, var) = ob.factor(idx);
            &mono[parent] * &inner[var]
        };
        for (o, p) in out.iter_mut().zip(outer) {
            let c = p.coeffs()[idx];
            if c != 0.0 {
                *o += &(&m * c);
            }
        }
        mono.push(m);
    }
    Ok(out)
}

/// One `(multi-index, coefficient)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialTerm {
    pub exponents: Vec<u8>,
    pub coeff: f64,
}

/// Serialized [`TaylorMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialMap {
    pub num_vars: usize,
    pub order: usize,
    pub outputs: Vec<Vec<SerialTerm>>,
}
