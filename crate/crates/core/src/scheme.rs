//! Stencil constants of the Crank-Nicolson compact scheme and the matrices
//! of the fully discrete system `(X + Y) U^{m+1} = (X - Y) U^m + F^m`.

use crate::error::{ensure_positive, Error, Result};
use crate::toeplitz::TridiagToeplitz;

/// The six stencil constants for given `(c, dz, dv)`.
///
/// `c1, c2, c3` weight the time difference at the left, centre and right
/// nodes; `y1, y2, y3` are the matching weights of the averaged spatial
/// operator. With `b = dv / dz^2`:
///
/// ```text
/// c1 = (2 + dz) / (24 dv)    c2 = 5 / (6 dv)    c3 = (2 - dz) / (24 dv)
/// y1 = -c/(2 dv) [(1 + dz/2) b + dv/12]
/// y2 =  c/(2 dv) (2 b + dv/6)
/// y3 = -c/(2 dv) [(1 - dz/2) b + dv/12]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeCoefficients {
    pub c: f64,
    pub dz: f64,
    pub dv: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

pub fn coefficients(c: f64, dz: f64, dv: f64) -> Result<SchemeCoefficients> {
    ensure_positive("c", c)?;
    ensure_positive("dz", dz)?;
    ensure_positive("dv", dv)?;
    if dz >= 2.0 {
        return Err(Error::StepTooLarge(dz));
    }
    let b = dv / (dz * dz);
    let half = c / (2.0 * dv);
    Ok(SchemeCoefficients {
        c,
        dz,
        dv,
        b,
        c1: (2.0 + dz) / (24.0 * dv),
        c2: 5.0 / (6.0 * dv),
        c3: (2.0 - dz) / (24.0 * dv),
        y1: -half * ((1.0 + 0.5 * dz) * b + dv / 12.0),
        y2: half * (2.0 * b + dv / 6.0),
        y3: -half * ((1.0 - 0.5 * dz) * b + dv / 12.0),
    })
}

impl SchemeCoefficients {
    /// `c2 / (2 sqrt(c1 c3))`, which simplifies to `10 / sqrt(4 - dz^2)`.
    pub fn toeplitz_argument(&self) -> f64 {
        self.c2 / (2.0 * (self.c1 * self.c3).sqrt())
    }
}

fn interior_order(intervals: usize) -> Result<usize> {
    if intervals < 2 {
        return Err(Error::TooFewIntervals(intervals));
    }
    Ok(intervals - 1)
}

/// `X = tridiag(c1, c2, c3)` of order `N - 1`.
pub fn assemble_x(coeffs: &SchemeCoefficients, intervals: usize) -> Result<TridiagToeplitz> {
    let n = interior_order(intervals)?;
    Ok(TridiagToeplitz::new(coeffs.c1, coeffs.c2, coeffs.c3, n))
}

/// `Y = tridiag(y1, y2, y3)` of order `N - 1`.
pub fn assemble_y(coeffs: &SchemeCoefficients, intervals: usize) -> Result<TridiagToeplitz> {
    let n = interior_order(intervals)?;
    Ok(TridiagToeplitz::new(coeffs.y1, coeffs.y2, coeffs.y3, n))
}

/// Boundary forcing `F^m`: only the first and last entries are non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryVector {
    len: usize,
    first: f64,
    last: f64,
}

impl BoundaryVector {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn first(&self) -> f64 {
        if self.len == 1 {
            self.first + self.last
        } else {
            self.first
        }
    }

    pub fn last(&self) -> f64 {
        if self.len == 1 {
            self.first + self.last
        } else {
            self.last
        }
    }

    /// `rhs += F^m`.
    pub fn add_to(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.len);
        rhs[0] += self.first;
        rhs[self.len - 1] += self.last;
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len];
        self.add_to(&mut v);
        v
    }
}

/// `F^m` from the boundary traces at `v_m = m dv` and `v_{m+1}`.
pub fn boundary_vector(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    left: &dyn Fn(f64) -> f64,
    right: &dyn Fn(f64) -> f64,
    m: usize,
) -> Result<BoundaryVector> {
    let len = interior_order(intervals)?;
    let (now, next) = (m as f64 * coeffs.dv, (m + 1) as f64 * coeffs.dv);
    let SchemeCoefficients { c1, c3, y1, y3, .. } = *coeffs;
    Ok(BoundaryVector {
        len,
        first: (c1 - y1) * left(now) - (c1 + y1) * left(next),
        last: (c3 - y3) * right(now) - (c3 + y3) * right(next),
    })
}
