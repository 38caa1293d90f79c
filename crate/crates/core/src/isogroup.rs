//! The model manifold `I x R x V` with metric `kappa dt^2 + dt ds + g`, the
//! group `S x R x E` acting on it, and numerical isometry checks.
//!
//! Here `E` is the solution space of `u'' = f u + A u`; a triple `(q, p, C)`
//! acts on it by `(sigma u)(t) = C u((t - p) / q)`.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nullforms::{int_power, jordan_block, InnerProduct, NilpotentSelfAdjoint};
use crate::scalar::{Real, Scalar};
use crate::solspace::{omega, transform, HomogeneityFunction, OdeModel, Solution};

/// `(g, A, f)` on `I = (0, inf)`; `n = m + 2`.
#[derive(Clone, Debug)]
pub struct ModelData<R> {
    pub g: InnerProduct<R>,
    pub a: NilpotentSelfAdjoint<R>,
    pub f: HomogeneityFunction<R>,
    ode: Arc<OdeModel<R>>,
}

impl<R: Real> ModelData<R> {
    pub fn new(g: InnerProduct<R>, a: NilpotentSelfAdjoint<R>, f: HomogeneityFunction<R>) -> Result<Self> {
        if g.dim() < 2 || a.dim() != g.dim() {
            return Err(Error::InvalidModel("need m = n - 2 >= 2 and matching dimensions".into()));
        }
        let ode = OdeModel::new(g.gram().clone(), a.matrix().clone(), f.clone())?;
        Ok(Self { g, a, f, ode })
    }

    /// `g` antidiagonal with sign `epsilon`, `A` the Jordan block.
    pub fn canonical(m: usize, epsilon: i32, f: HomogeneityFunction<R>) -> Result<Self> {
        let g = InnerProduct::antidiagonal(m, epsilon);
        let a = NilpotentSelfAdjoint::new(jordan_block(m), &g)?;
        Self::new(g, a, f)
    }

    pub fn m(&self) -> usize {
        self.g.dim()
    }

    pub fn n(&self) -> usize {
        self.m() + 2
    }

    pub fn ode(&self) -> &Arc<OdeModel<R>> {
        &self.ode
    }

    pub fn kappa(&self, x: &Point<R>) -> R {
        self.f.eval(x.t) * self.g.pair(&x.v, &x.v) + self.g.pair(&self.a.matrix().mul_vec(&x.v), &x.v)
    }

    pub fn solution(&self, u0: Vec<R>, v0: Vec<R>) -> Result<Solution<R>> {
        Solution::new(self.ode.clone(), R::one(), u0, v0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point<R> {
    pub t: R,
    pub s: R,
    pub v: Vec<R>,
}

impl<R: Real> Point<R> {
    pub fn new(t: R, s: R, v: Vec<R>) -> Result<Self> {
        if !(t > R::zero()) {
            return Err(Error::NonPositiveTime(Scalar::to_f64(&t)));
        }
        Ok(Self { t, s, v })
    }

    fn coords(&self) -> Vec<R> {
        let mut out = vec![self.t, self.s];
        out.extend_from_slice(&self.v);
        out
    }

    fn from_coords(c: &[R]) -> Self {
        Self {
            t: c[0],
            s: c[1],
            v: c[2..].to_vec(),
        }
    }

    /// Largest `|x_i - y_i| / max(1, |y_i|)` over the coordinates.
    pub fn relative_diff(&self, other: &Self) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (*a - b).magnitude() / b.magnitude().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (*a - b).magnitude())
            .fold(0.0, f64::max)
    }
}

/// Block metric in coordinates `(t, s, v_1, ..., v_m)` for a given `kappa`.
pub fn metric_from_kappa<T: Scalar>(kappa: T, g: &Matrix<T>) -> Matrix<T> {
    let m = g.rows();
    let half = T::from_ratio(1, 2);
    Matrix::from_fn(m + 2, m + 2, |i, j| match (i, j) {
        (0, 0) => kappa.clone(),
        (0, 1) | (1, 0) => half.clone(),
        (i, j) if i >= 2 && j >= 2 => g[(i - 2, j - 2)].clone(),
        _ => T::zero(),
    })
}

pub fn metric_at<R: Real>(model: &ModelData<R>, x: &Point<R>) -> Result<Matrix<R>> {
    let gm = metric_from_kappa(model.kappa(x), model.g.gram());
    if gm.det().negligible() {
        return Err(Error::InvalidModel("metric is degenerate".into()));
    }
    Ok(gm)
}

/// Vector dual to the covector `dt`, i.e. `G^{-1} e_t`.
pub fn raise_dt<T: Scalar>(metric: &Matrix<T>) -> Result<Vec<T>> {
    let mut e = vec![T::zero(); metric.rows()];
    e[0] = T::one();
    metric
        .solve(&e)
        .ok_or_else(|| Error::InvalidModel("metric is degenerate".into()))
}

/// `(q, p, C, r, u)`.
#[derive(Clone, Debug)]
pub struct GroupElement<R> {
    pub q: R,
    pub p: R,
    pub c: Matrix<R>,
    pub r: R,
    pub u: Solution<R>,
}

fn sample_times<R: Real>() -> Vec<R> {
    (0..8).map(|i| R::lit(0.41 + 0.57 * i as f64)).collect()
}

impl<R: Real> GroupElement<R> {
    /// Validates `C^T g C = g`, `C A C^{-1} = q^2 A` and `f(t) = q^2 f(q t + p)`.
    pub fn new(model: &ModelData<R>, q: R, p: R, c: Matrix<R>, r: R, u: Solution<R>) -> Result<Self> {
        let tol = 1e-9;
        if q == R::zero() {
            return Err(Error::BadScale(format!("{q}")));
        }
        let g = model.g.gram();
        let a = model.a.matrix();
        let scale = c.max_abs().max(1.0);
        if (&(&c.transpose() * g) * &c).max_abs_diff(g) > tol * scale * scale {
            return Err(Error::InvalidModel("C is not a g-isometry".into()));
        }
        if (&c * a).max_abs_diff(&(&a.scale(&(q * q)) * &c)) > tol * scale * (q * q).magnitude().max(1.0) {
            return Err(Error::InvalidModel("C A C^-1 != q^2 A".into()));
        }
        for t in sample_times::<R>() {
            let image = q * t + p;
            if image > R::zero() {
                let lhs = model.f.eval(t);
                let rhs = q * q * model.f.eval(image);
                if (lhs - rhs).magnitude() > tol * lhs.magnitude().max(1.0) {
                    return Err(Error::InvalidModel("f(t) != q^2 f(q t + p)".into()));
                }
            }
        }
        if !u.same_model(&Solution::zero(model.ode.clone())) {
            return Err(Error::ModelMismatch);
        }
        Ok(Self { q, p, c, r, u })
    }

    fn unchecked(q: R, p: R, c: Matrix<R>, r: R, u: Solution<R>) -> Self {
        Self { q, p, c, r, u }
    }

    pub fn identity(model: &ModelData<R>) -> Self {
        Self::unchecked(
            R::one(),
            R::zero(),
            Matrix::identity(model.m()),
            R::zero(),
            Solution::zero(model.ode.clone()),
        )
    }

    /// `(1, 0, Id, r, u)`.
    pub fn in_h(model: &ModelData<R>, r: R, u: Solution<R>) -> Result<Self> {
        Self::new(model, R::one(), R::zero(), Matrix::identity(model.m()), r, u)
    }

    /// `sigma w` for this element's `(q, p, C)`.
    pub fn sigma(&self, w: &Solution<R>) -> Result<Solution<R>> {
        transform(w, self.q, self.p, &self.c)
    }

    /// Largest difference of the components `(q, p, C, r, u)`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let w = other.u.rebased(self.u.t0())?;
        let vec_diff = |a: &[R], b: &[R]| a.iter().zip(b).map(|(x, y)| (*x - *y).magnitude()).fold(0.0, f64::max);
        Ok([
            (self.q - other.q).magnitude(),
            (self.p - other.p).magnitude(),
            self.c.max_abs_diff(&other.c),
            (self.r - other.r).magnitude(),
            vec_diff(self.u.u0(), w.u0()),
            vec_diff(self.u.v0(), w.v0()),
        ]
        .into_iter()
        .fold(0.0, f64::max))
    }
}

/// `(sigma, r, u)(sigma^, r^, u^) = (sigma sigma^, Omega(sigma u^, u) + r + r^/q, sigma u^ + u)`.
pub fn group_mul<R: Real>(x: &GroupElement<R>, y: &GroupElement<R>) -> Result<GroupElement<R>> {
    if !x.u.same_model(&y.u) {
        return Err(Error::ModelMismatch);
    }
    let moved = x.sigma(&y.u)?;
    let r = omega(&moved, &x.u)? + x.r + y.r / x.q;
    Ok(GroupElement::unchecked(
        x.q * y.q,
        x.q * y.p + x.p,
        &x.c * &y.c,
        r,
        moved.combine(R::one(), &x.u, R::one())?,
    ))
}

pub fn group_identity<R: Real>(model: &ModelData<R>) -> GroupElement<R> {
    GroupElement::identity(model)
}

/// `(sigma, r, u)^{-1} = (sigma^{-1}, -q r, -sigma^{-1} u)`.
pub fn group_inv<R: Real>(x: &GroupElement<R>) -> Result<GroupElement<R>> {
    let ci = x.c
        .inverse()
        .ok_or_else(|| Error::InvalidModel("C is singular".into()))?;
    let qi = R::one() / x.q;
    let pi = -x.p / x.q;
    let back = transform(&x.u, qi, pi, &ci)?.scaled(-R::one());
    Ok(GroupElement::unchecked(qi, pi, ci, -x.q * x.r, back))
}

/// `(q t + p, -<u'(t'), 2 C v + u(t')> + r + s / q, C v + u(t'))`, `t' = q t + p`.
pub fn act<R: Real>(model: &ModelData<R>, x: &GroupElement<R>, pt: &Point<R>) -> Result<Point<R>> {
    let t1 = x.q * pt.t + x.p;
    if !(t1 > R::zero()) {
        return Err(Error::NonPositiveTime(Scalar::to_f64(&t1)));
    }
    let (u, du) = x.u.evaluate(t1)?;
    let cv = x.c.mul_vec(&pt.v);
    let two_cv_u: Vec<R> = cv.iter().zip(&u).map(|(a, b)| *a + *a + *b).collect();
    let s = -model.g.pair(&du, &two_cv_u) + x.r + pt.s / x.q;
    let v = cv.iter().zip(&u).map(|(a, b)| *a + *b).collect();
    Ok(Point { t: t1, s, v })
}

/// Differential of `act` in coordinates `(t, s, v)`.
pub fn action_jacobian<R: Real>(model: &ModelData<R>, x: &GroupElement<R>, pt: &Point<R>) -> Result<Matrix<R>> {
    let m = model.m();
    let t1 = x.q * pt.t + x.p;
    if !(t1 > R::zero()) {
        return Err(Error::NonPositiveTime(Scalar::to_f64(&t1)));
    }
    let (u, du) = x.u.evaluate(t1)?;
    let ddu = crate::solspace::Curve::accel(&x.u, t1)?;
    let cv = x.c.mul_vec(&pt.v);
    let w: Vec<R> = cv.iter().zip(&u).map(|(a, b)| *a + *a + *b).collect();
    let g = model.g.gram();
    let mut j = Matrix::zeros(m + 2, m + 2);
    j[(0, 0)] = x.q;
    j[(1, 0)] = -x.q * (model.g.pair(&ddu, &w) + model.g.pair(&du, &du));
    j[(1, 1)] = R::one() / x.q;
    // d s' / d v = -2 du^T g C
    let gdu = g.mul_vec(&du);
    for k in 0..m {
        let mut acc = R::zero();
        for i in 0..m {
            acc = acc + gdu[i] * x.c[(i, k)];
        }
        j[(1, 2 + k)] = -(acc + acc);
        j[(2 + k, 0)] = x.q * du[k];
        for l in 0..m {
            j[(2 + k, 2 + l)] = x.c[(k, l)];
        }
    }
    Ok(j)
}

/// Central-difference Jacobian of `act`.
pub fn finite_difference_jacobian<R: Real>(
    model: &ModelData<R>,
    x: &GroupElement<R>,
    pt: &Point<R>,
    h: R,
) -> Result<Matrix<R>> {
    let n = model.n();
    let base = pt.coords();
    let mut j = Matrix::zeros(n, n);
    for col in 0..n {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[col] = plus[col] + h;
        minus[col] = minus[col] - h;
        let a = act(model, x, &Point::from_coords(&plus))?.coords();
        let b = act(model, x, &Point::from_coords(&minus))?.coords();
        for row in 0..n {
            j[(row, col)] = (a[row] - b[row]) / (h + h);
        }
    }
    Ok(j)
}

/// `|J^T G(x') J - G(x)|_inf`.
pub fn isometry_defect<R: Real>(model: &ModelData<R>, x: &GroupElement<R>, pt: &Point<R>) -> Result<f64> {
    let j = action_jacobian(model, x, pt)?;
    let image = act(model, x, pt)?;
    let pulled = &(&j.transpose() * &metric_at(model, &image)?) * &j;
    Ok(pulled.max_abs_diff(&metric_at(model, pt)?))
}

/// `(t, z - <u'(t), u(t)>, u(t))`.
pub fn equivariant_chart<R: Real>(model: &ModelData<R>, t: R, z: R, u: &Solution<R>) -> Result<Point<R>> {
    let (x, dx) = u.evaluate(t)?;
    Point::new(t, z - model.g.pair(&dx, &x), x)
}

/// `h = (r, w)` acting on `(z, u)` by `(Omega(u, w) + r + z, w + u)`.
pub fn h_translate<R: Real>(h: &GroupElement<R>, z: R, u: &Solution<R>) -> Result<(R, Solution<R>)> {
    Ok((omega(u, &h.u)? + h.r + z, h.u.combine(R::one(), u, R::one())?))
}

/// Uniform sampling data for random group elements and points.
pub fn random_solution(model: &ModelData<f64>, rng: &mut ChaCha8Rng, size: f64) -> Result<Solution<f64>> {
    let m = model.m();
    let u0 = (0..m).map(|_| rng.random_range(-size..=size)).collect();
    let v0 = (0..m).map(|_| rng.random_range(-size..=size)).collect();
    model.solution(u0, v0)
}

/// `q' = q^e` with `e` in `[-2, 2]`, `C = +-diag(q'^{m+1-2j})`, `p = 0`;
/// assumes canonical coordinates and `f` homogeneous of degree `-2`.
pub fn random_element(model: &ModelData<f64>, q: f64, rng: &mut ChaCha8Rng) -> Result<GroupElement<f64>> {
    let m = model.m() as i64;
    let e = rng.random_range(-2..=2i64);
    let qq = int_power(&q, e);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let c = Matrix::diagonal(&(1..=m).map(|j| sign * int_power(&qq, m + 1 - 2 * j)).collect::<Vec<f64>>());
    let r = rng.random_range(-1.0..=1.0);
    let u = random_solution(model, rng, 1.0)?;
    GroupElement::new(model, qq, 0.0, c, r, u)
}

pub fn random_point(model: &ModelData<f64>, rng: &mut ChaCha8Rng) -> Point<f64> {
    Point {
        t: rng.random_range(0.5..=2.0),
        s: rng.random_range(-1.0..=1.0),
        v: (0..model.m()).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;
    use rand::SeedableRng;

    fn model() -> ModelData<f64> {
        ModelData::canonical(2, 1, HomogeneityFunction::euler(2.0)).unwrap()
    }

    #[test]
    fn raised_dt_is_twice_ds() {
        let g = InnerProduct::<BigRational>::antidiagonal(3, -1);
        let gm = metric_from_kappa(rat(7, 3), g.gram());
        let v = raise_dt(&gm).unwrap();
        let mut want = vec![rat(0, 1); 5];
        want[1] = rat(2, 1);
        assert_eq!(v, want);
    }

    #[test]
    fn identity_and_inverse() {
        let md = model();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_element(&md, 2.0, &mut rng).unwrap();
        let id = group_identity(&md);
        assert!(group_mul(&x, &id).unwrap().distance(&x).unwrap() < 1e-12);
        let prod = group_mul(&x, &group_inv(&x).unwrap()).unwrap();
        assert!(prod.distance(&id).unwrap() < 1e-10);
    }

    #[test]
    fn associativity_and_action() {
        let md = model();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_element(&md, 2.0, &mut rng).unwrap();
            let b = random_element(&md, 2.0, &mut rng).unwrap();
            let c = random_element(&md, 2.0, &mut rng).unwrap();
            let left = group_mul(&group_mul(&a, &b).unwrap(), &c).unwrap();
            let right = group_mul(&a, &group_mul(&b, &c).unwrap()).unwrap();
            assert!(left.distance(&right).unwrap() < 1e-10);
            let pt = random_point(&md, &mut rng);
            let one = act(&md, &a, &act(&md, &b, &pt).unwrap()).unwrap();
            let two = act(&md, &group_mul(&a, &b).unwrap(), &pt).unwrap();
            assert!(one.relative_diff(&two) < 1e-10, "{one:?} {two:?}");
        }
    }

    #[test]
    fn isometries_and_jacobians() {
        let md = model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_element(&md, 2.0, &mut rng).unwrap();
            let pt = random_point(&md, &mut rng);
            assert!(isometry_defect(&md, &x, &pt).unwrap() < 1e-8);
            let fd = finite_difference_jacobian(&md, &x, &pt, 1e-5).unwrap();
            let j = action_jacobian(&md, &x, &pt).unwrap();
            assert!(fd.max_abs_diff(&j) < 1e-5 * j.max_abs().max(1.0));
        }
    }

    #[test]
    fn flow_translates_s() {
        let md = model();
        let h = GroupElement::in_h(&md, 0.6, Solution::zero(md.ode().clone())).unwrap();
        let pt = Point::new(1.5, 0.25, vec![1.0, -2.0]).unwrap();
        let out = act(&md, &h, &pt).unwrap();
        assert_eq!(out, Point::new(1.5, 0.85, vec![1.0, -2.0]).unwrap());
    }

    #[test]
    fn conjugation_twist() {
        let md = model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_element(&md, 2.0, &mut rng).unwrap();
        let u = random_solution(&md, &mut rng, 1.0).unwrap();
        let h = GroupElement::in_h(&md, 0.3, u.clone()).unwrap();
        let conj = group_mul(&group_mul(&g, &h).unwrap(), &group_inv(&g).unwrap()).unwrap();
        let su = g.sigma(&u).unwrap();
        let want = GroupElement::in_h(&md, 2.0 * omega(&su, &g.u).unwrap() + 0.3 / g.q, su).unwrap();
        assert!(conj.distance(&want).unwrap() < 1e-9);
    }

    #[test]
    fn chart_is_equivariant() {
        let md = model();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let u = random_solution(&md, &mut rng, 1.0).unwrap();
            let w = random_solution(&md, &mut rng, 1.0).unwrap();
            let h = GroupElement::in_h(&md, 0.7, w).unwrap();
            let (t, z) = (rng.random_range(0.5..3.0), rng.random_range(-1.0..1.0));
            let (z2, u2) = h_translate(&h, z, &u).unwrap();
            let lhs = equivariant_chart(&md, t, z2, &u2).unwrap();
            let rhs = act(&md, &h, &equivariant_chart(&md, t, z, &u).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_scaling() {
        let md = model();
        let u = Solution::zero(md.ode().clone());
        let c = Matrix::diagonal(&[2.0, 0.5]);
        assert!(GroupElement::new(&md, 3.0, 0.0, c.clone(), 0.0, u.clone()).is_err());
        assert!(GroupElement::new(&md, 2.0, 0.5, c.clone(), 0.0, u.clone()).is_err());
        assert!(GroupElement::new(&md, 2.0, 0.0, c, 0.0, u).is_ok());
    }
}
