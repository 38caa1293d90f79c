//! Solutions of `u'' = f(t) u + B u` on `(0, inf)` and the operator `CT`.
//!
//! `B` is a constant nilpotent coupling (`q^2 A` or `A`), `f` satisfies
//! `q^2 f(q t) = f(t)`. For `f = c / t^2` every solution is a finite sum of
//! terms `t^beta P(ln t)` with vector polynomials `P`, evaluated in closed
//! form; other `f` are integrated numerically. Solutions are stored by their
//! initial data at a base point `t0`.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::nullforms::int_power;
use crate::ode::{integrate, Dopri5Options};
use crate::scalar::{Real, Scalar};

/// `mean + sum_n cos[n-1] cos(2 pi n x) + sin[n-1] sin(2 pi n x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierProfile<R> {
    pub mean: R,
    pub cos: Vec<R>,
    pub sin: Vec<R>,
}

impl<R: Real> FourierProfile<R> {
    pub fn eval(&self, x: R) -> R {
        let tau = R::lit(std::f64::consts::TAU);
        let mut acc = self.mean;
        for (n, a) in self.cos.iter().enumerate() {
            acc = acc + *a * (tau * R::from_usize(n + 1).unwrap() * x).cos();
        }
        for (n, b) in self.sin.iter().enumerate() {
            acc = acc + *b * (tau * R::from_usize(n + 1).unwrap() * x).sin();
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HomogeneityFunction<R> {
    /// `f(t) = c / t^2`.
    Euler { c: R },
    /// `f(t) = profile(ln t / ln q) / t^2`.
    LogPeriodic { q: R, profile: FourierProfile<R> },
}

impl<R: Real> HomogeneityFunction<R> {
    pub fn euler(c: R) -> Self {
        Self::Euler { c }
    }

    pub fn eval(&self, t: R) -> R {
        match self {
            Self::Euler { c } => *c / (t * t),
            Self::LogPeriodic { q, profile } => profile.eval(t.ln() / q.ln()) / (t * t),
        }
    }

    /// Largest relative violation of `q^2 f(q t) = f(t)` over `samples`.
    pub fn symmetry_defect(&self, q: R, samples: &[R]) -> R {
        samples
            .iter()
            .map(|&t| {
                let f = self.eval(t);
                (q * q * self.eval(q * t) - f).abs() / f.abs().max(R::one())
            })
            .fold(R::zero(), R::max)
    }
}

/// One closed-form term `t^beta * sum_i coeffs[i] (ln t)^i`.
#[derive(Clone, Debug, PartialEq)]
struct PowerLogTerm<R> {
    beta: R,
    coeffs: Vec<Vec<R>>,
}

impl<R: Real> PowerLogTerm<R> {
    /// Value, first and second derivative at `t`.
    fn eval(&self, t: R, out: &mut [Vec<R>; 3]) {
        let x = t.ln();
        let m = out[0].len();
        let deg = self.coeffs.len();
        let b = self.beta;
        let tb = t.powf(b);
        let tb1 = tb / t;
        let tb2 = tb1 / t;
        for comp in 0..m {
            let (mut p, mut dp, mut ddp) = (R::zero(), R::zero(), R::zero());
            for i in (0..deg).rev() {
                let c = self.coeffs[i][comp];
                ddp = ddp * x + dp * R::lit(2.0);
                dp = dp * x + p;
                p = p * x + c;
            }
            out[0][comp] = out[0][comp] + tb * p;
            out[1][comp] = out[1][comp] + tb1 * (b * p + dp);
            out[2][comp] = out[2][comp] + tb2 * (b * (b - R::one()) * p + (R::lit(2.0) * b - R::one()) * dp + ddp);
        }
    }
}

/// Solves `P'' + (2 beta - 1) P' + (beta (beta - 1) - c) P = rhs` for a vector
/// polynomial `P` in `x`, taking every integration constant to be zero.
fn solve_level<R: Real>(beta: R, c: R, rhs: &[Vec<R>]) -> Vec<Vec<R>> {
    let m = rhs[0].len();
    let p0 = beta * (beta - R::one()) - c;
    let p1 = R::lit(2.0) * beta - R::one();
    let tiny = R::lit(1e-9) * (R::one() + beta * beta);
    let deg = rhs.len();
    let zero = || vec![R::zero(); m];
    let fi = |i: usize| R::from_usize(i).unwrap();
    if p0.abs() > tiny {
        let mut p = vec![zero(); deg + 2];
        for i in (0..deg).rev() {
            for k in 0..m {
                let v = rhs[i][k] - fi((i + 2) * (i + 1)) * p[i + 2][k] - p1 * fi(i + 1) * p[i + 1][k];
                p[i][k] = v / p0;
            }
        }
        p.truncate(deg);
        p
    } else if p1.abs() > tiny {
        // P' solves the first-order problem; P(0) = 0
        let mut p = vec![zero(); deg + 3];
        for i in (0..deg).rev() {
            for k in 0..m {
                let v = rhs[i][k] - fi((i + 2) * (i + 1)) * p[i + 2][k];
                p[i + 1][k] = v / (p1 * fi(i + 1));
            }
        }
        p.truncate(deg + 1);
        p
    } else {
        let mut p = vec![zero(); deg + 2];
        for i in 0..deg {
            for k in 0..m {
                p[i + 2][k] = rhs[i][k] / fi((i + 2) * (i + 1));
            }
        }
        p
    }
}

/// Closed-form fundamental system for `f = c / t^2` and nilpotent `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerEngine<R> {
    m: usize,
    /// Exponents `(alpha_plus, alpha_minus)`, equal when `1 + 4c = 0`.
    pub alphas: (R, R),
    basis: Vec<Vec<PowerLogTerm<R>>>,
    inv_at_one: Matrix<R>,
}

impl<R: Real> EulerEngine<R> {
    pub fn new(c: R, coupling: &Matrix<R>) -> Result<Self> {
        let m = coupling.rows();
        let disc = R::one() + R::lit(4.0) * c;
        let tiny = R::lit(1e-12);
        if disc < -tiny {
            return Err(Error::ComplexExponents {
                disc: Scalar::to_f64(&disc),
            });
        }
        let half = R::lit(0.5);
        let repeated = disc.abs() <= tiny;
        let root = if repeated { R::zero() } else { disc.sqrt() };
        let alphas = (half + half * root, half - half * root);
        let mut basis = Vec::with_capacity(2 * m);
        for family in 0..2 {
            let alpha = if family == 0 || repeated { alphas.0 } else { alphas.1 };
            for i in 0..m {
                let mut seed = vec![vec![R::zero(); m]];
                if family == 1 && repeated {
                    seed.push(vec![R::zero(); m]);
                    seed[1][i] = R::one();
                } else {
                    seed[0][i] = R::one();
                }
                basis.push(Self::family(alpha, c, coupling, seed)?);
            }
        }
        let mut engine = Self {
            m,
            alphas,
            basis,
            inv_at_one: Matrix::identity(2 * m),
        };
        engine.inv_at_one = engine
            .fundamental(R::one())
            .inverse()
            .ok_or_else(|| Error::Numerical("closed-form fundamental matrix is singular".into()))?;
        Ok(engine)
    }

    fn family(alpha: R, c: R, coupling: &Matrix<R>, seed: Vec<Vec<R>>) -> Result<Vec<PowerLogTerm<R>>> {
        let m = coupling.rows();
        let mut terms = vec![PowerLogTerm { beta: alpha, coeffs: seed }];
        for level in 1..=4 * m + 2 {
            let prev = &terms[level - 1].coeffs;
            let rhs: Vec<Vec<R>> = prev.iter().map(|v| coupling.mul_vec(v)).collect();
            if rhs.iter().all(|v| v.iter().all(|x| *x == R::zero())) {
                return Ok(terms);
            }
            let beta = alpha + R::lit(2.0 * level as f64);
            terms.push(PowerLogTerm {
                beta,
                coeffs: solve_level(beta, c, &rhs),
            });
        }
        Err(Error::InvalidModel("coupling is not nilpotent; the closed-form cascade does not terminate".into()))
    }

    /// Columns `(phi_i(t), phi_i'(t))` of the fundamental system.
    pub fn fundamental(&self, t: R) -> Matrix<R> {
        let m = self.m;
        let mut x = Matrix::zeros(2 * m, 2 * m);
        for (col, terms) in self.basis.iter().enumerate() {
            let mut out = [vec![R::zero(); m], vec![R::zero(); m], vec![R::zero(); m]];
            for term in terms {
                term.eval(t, &mut out);
            }
            for i in 0..m {
                x[(i, col)] = out[0][i];
                x[(m + i, col)] = out[1][i];
            }
        }
        x
    }

    /// `(u, u', u'')` at `t` for coefficients in the fundamental basis.
    fn eval_combination(&self, coeffs: &[R], t: R) -> [Vec<R>; 3] {
        let m = self.m;
        let mut total = [vec![R::zero(); m], vec![R::zero(); m], vec![R::zero(); m]];
        for (terms, &a) in self.basis.iter().zip(coeffs) {
            if a == R::zero() {
                continue;
            }
            let mut out = [vec![R::zero(); m], vec![R::zero(); m], vec![R::zero(); m]];
            for term in terms {
                term.eval(t, &mut out);
            }
            for d in 0..3 {
                for i in 0..m {
                    total[d][i] = total[d][i] + a * out[d][i];
                }
            }
        }
        total
    }

    fn coefficients(&self, t0: R, u0: &[R], v0: &[R]) -> Result<Vec<R>> {
        let data: Vec<R> = u0.iter().chain(v0).copied().collect();
        if t0 == R::one() {
            return Ok(self.inv_at_one.mul_vec(&data));
        }
        self.fundamental(t0)
            .solve(&data)
            .ok_or_else(|| Error::Numerical("closed-form fundamental matrix is singular".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    ClosedForm,
    Numeric,
}

/// The data `(g, B, f)` of `u'' = f u + B u`.
#[derive(Clone, Debug)]
pub struct OdeModel<R> {
    gram: Matrix<R>,
    coupling: Matrix<R>,
    f: HomogeneityFunction<R>,
    engine: Option<EulerEngine<R>>,
    path: EvalPath,
    opts: Dopri5Options<R>,
}

impl<R: Real> PartialEq for OdeModel<R> {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram && self.coupling == other.coupling && self.f == other.f
    }
}

impl<R: Real> OdeModel<R> {
    /// Uses the closed form whenever `f` is of Euler type.
    pub fn new(gram: Matrix<R>, coupling: Matrix<R>, f: HomogeneityFunction<R>) -> Result<Arc<Self>> {
        Self::with_path(gram, coupling, f, EvalPath::ClosedForm)
    }

    pub fn with_path(
        gram: Matrix<R>,
        coupling: Matrix<R>,
        f: HomogeneityFunction<R>,
        path: EvalPath,
    ) -> Result<Arc<Self>> {
        let m = gram.rows();
        if !gram.is_square() || coupling.rows() != m || coupling.cols() != m {
            return Err(Error::InvalidModel("Gram and coupling matrices must be m x m".into()));
        }
        let engine = match &f {
            HomogeneityFunction::Euler { c } => Some(EulerEngine::new(*c, &coupling)?),
            HomogeneityFunction::LogPeriodic { .. } => None,
        };
        let path = if engine.is_none() { EvalPath::Numeric } else { path };
        Ok(Arc::new(Self {
            gram,
            coupling,
            f,
            engine,
            path,
            opts: Dopri5Options::default(),
        }))
    }

    /// Same data, evaluated along `path`.
    pub fn rerouted(&self, path: EvalPath) -> Result<Arc<Self>> {
        Self::with_path(self.gram.clone(), self.coupling.clone(), self.f.clone(), path)
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix<R> {
        &self.gram
    }

    pub fn coupling(&self) -> &Matrix<R> {
        &self.coupling
    }

    pub fn homogeneity(&self) -> &HomogeneityFunction<R> {
        &self.f
    }

    pub fn path(&self) -> EvalPath {
        self.path
    }

    pub fn engine(&self) -> Option<&EulerEngine<R>> {
        self.engine.as_ref()
    }

    pub fn pair(&self, x: &[R], y: &[R]) -> R {
        self.gram.bilinear(x, y)
    }

    fn integrate_state(&self, t0: R, u0: &[R], v0: &[R], t: R) -> Result<(Vec<R>, Vec<R>)> {
        let m = self.dim();
        let y0: Vec<R> = u0.iter().chain(v0).copied().collect();
        let rhs = |s: R, y: &[R]| {
            let fs = self.f.eval(s);
            let bu = self.coupling.mul_vec(&y[..m]);
            let mut out = Vec::with_capacity(2 * m);
            out.extend_from_slice(&y[m..]);
            out.extend((0..m).map(|i| fs * y[i] + bu[i]));
            out
        };
        let y = integrate(rhs, t0, &y0, t, &self.opts)?;
        Ok((y[..m].to_vec(), y[m..].to_vec()))
    }
}

fn check_time<R: Real>(t: R) -> Result<()> {
    if t > R::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(Scalar::to_f64(&t)))
    }
}

/// Anything that can be evaluated as a curve in `V` and tested against the ODE.
pub trait Curve<R: Real> {
    fn model(&self) -> &OdeModel<R>;

    /// `(u(t), u'(t))`.
    fn state(&self, t: R) -> Result<(Vec<R>, Vec<R>)>;

    /// `u''(t)`, computed without using the differential equation.
    fn accel(&self, t: R) -> Result<Vec<R>>;
}

/// Relative size of `u'' - f u - B u` at `t`.
pub fn residual<R: Real>(curve: &impl Curve<R>, t: R) -> Result<R> {
    let model = curve.model();
    let (u, _) = curve.state(t)?;
    let acc = curve.accel(t)?;
    let f = model.f.eval(t);
    let bu = model.coupling.mul_vec(&u);
    let mut worst = R::zero();
    let mut scale = R::one();
    for i in 0..u.len() {
        let fu = f * u[i];
        worst = worst.max((acc[i] - fu - bu[i]).abs());
        scale = scale.max(acc[i].abs()).max(fu.abs()).max(bu[i].abs());
    }
    Ok(worst / scale)
}

/// Element of the solution space, given by initial data at `t0`.
#[derive(Clone, Debug)]
pub struct Solution<R> {
    model: Arc<OdeModel<R>>,
    t0: R,
    u0: Vec<R>,
    v0: Vec<R>,
    coeffs: Option<Vec<R>>,
}

impl<R: Real> Solution<R> {
    pub fn new(model: Arc<OdeModel<R>>, t0: R, u0: Vec<R>, v0: Vec<R>) -> Result<Self> {
        check_time(t0)?;
        let m = model.dim();
        if u0.len() != m || v0.len() != m {
            return Err(Error::InvalidModel(format!("initial data must have length {m}")));
        }
        let coeffs = match model.engine() {
            Some(e) => Some(e.coefficients(t0, &u0, &v0)?),
            None => None,
        };
        Ok(Self {
            model,
            t0,
            u0,
            v0,
            coeffs,
        })
    }

    pub fn zero(model: Arc<OdeModel<R>>) -> Self {
        let m = model.dim();
        Self::new(model, R::one(), vec![R::zero(); m], vec![R::zero(); m]).expect("zero data is valid")
    }

    pub fn model_arc(&self) -> &Arc<OdeModel<R>> {
        &self.model
    }

    pub fn t0(&self) -> R {
        self.t0
    }

    pub fn u0(&self) -> &[R] {
        &self.u0
    }

    pub fn v0(&self) -> &[R] {
        &self.v0
    }

    pub fn same_model(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.model, &other.model) || *self.model == *other.model
    }

    /// The same solution described by its data at `t1`.
    pub fn rebased(&self, t1: R) -> Result<Self> {
        let (u, v) = self.evaluate(t1)?;
        Self::new(self.model.clone(), t1, u, v)
    }

    pub fn evaluate(&self, t: R) -> Result<(Vec<R>, Vec<R>)> {
        match self.model.path {
            EvalPath::ClosedForm => self.evaluate_closed_form(t),
            EvalPath::Numeric => self.evaluate_numeric(t),
        }
    }

    pub fn evaluate_closed_form(&self, t: R) -> Result<(Vec<R>, Vec<R>)> {
        check_time(t)?;
        let (engine, coeffs) = self.closed_form()?;
        let [u, v, _] = engine.eval_combination(coeffs, t);
        Ok((u, v))
    }

    pub fn evaluate_numeric(&self, t: R) -> Result<(Vec<R>, Vec<R>)> {
        check_time(t)?;
        self.model.integrate_state(self.t0, &self.u0, &self.v0, t)
    }

    fn closed_form(&self) -> Result<(&EulerEngine<R>, &Vec<R>)> {
        match (self.model.engine(), &self.coeffs) {
            (Some(e), Some(c)) => Ok((e, c)),
            _ => Err(Error::InvalidModel("closed form is only available for f = c / t^2".into())),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: R, other: &Self, b: R) -> Result<Self> {
        if !self.same_model(other) {
            return Err(Error::ModelMismatch);
        }
        let other = if other.t0 == self.t0 { other.clone() } else { other.rebased(self.t0)? };
        let lin = |x: &[R], y: &[R]| x.iter().zip(y).map(|(p, q)| a * *p + b * *q).collect::<Vec<R>>();
        Self::new(
            self.model.clone(),
            self.t0,
            lin(&self.u0, &other.u0),
            lin(&self.v0, &other.v0),
        )
    }

    pub fn scaled(&self, a: R) -> Self {
        let s = |x: &[R]| x.iter().map(|v| a * *v).collect();
        Self::new(self.model.clone(), self.t0, s(&self.u0), s(&self.v0)).expect("scaling keeps data valid")
    }
}

impl<R: Real> Curve<R> for Solution<R> {
    fn model(&self) -> &OdeModel<R> {
        &self.model
    }

    fn state(&self, t: R) -> Result<(Vec<R>, Vec<R>)> {
        self.evaluate(t)
    }

    fn accel(&self, t: R) -> Result<Vec<R>> {
        check_time(t)?;
        match self.model.path {
            EvalPath::ClosedForm => {
                let (engine, coeffs) = self.closed_form()?;
                let [_, _, a] = engine.eval_combination(coeffs, t);
                Ok(a)
            }
            EvalPath::Numeric => {
                // five-point stencil on u'
                let h = t * R::lit(1e-3);
                let d = |s: R| self.evaluate_numeric(s).map(|(_, v)| v);
                let (p2, p1, m1, m2) = (d(t + h + h)?, d(t + h)?, d(t - h)?, d(t - h - h)?);
                Ok((0..p1.len())
                    .map(|i| (-p2[i] + R::lit(8.0) * (p1[i] - m1[i]) + m2[i]) / (R::lit(12.0) * h))
                    .collect())
            }
        }
    }
}

/// `t -> C u((t - p) / q)`, kept as a composition so closure under the
/// transformation can be tested directly.
#[derive(Clone, Debug)]
pub struct TransformedCurve<R> {
    pub inner: Solution<R>,
    pub q: R,
    pub p: R,
    pub c: Matrix<R>,
}

impl<R: Real> TransformedCurve<R> {
    fn arg(&self, t: R) -> R {
        (t - self.p) / self.q
    }
}

impl<R: Real> Curve<R> for TransformedCurve<R> {
    fn model(&self) -> &OdeModel<R> {
        &self.inner.model
    }

    fn state(&self, t: R) -> Result<(Vec<R>, Vec<R>)> {
        let (u, v) = self.inner.evaluate(self.arg(t))?;
        let v: Vec<R> = self.c.mul_vec(&v).into_iter().map(|x| x / self.q).collect();
        Ok((self.c.mul_vec(&u), v))
    }

    fn accel(&self, t: R) -> Result<Vec<R>> {
        let a = self.inner.accel(self.arg(t))?;
        let q2 = self.q * self.q;
        Ok(self.c.mul_vec(&a).into_iter().map(|x| x / q2).collect())
    }
}

/// `Omega(u, u') = <u_dot, u'> - <u, u'_dot>` from the initial data.
pub fn omega<R: Real>(u: &Solution<R>, w: &Solution<R>) -> Result<R> {
    if !u.same_model(w) || u.t0 != w.t0 {
        return Err(Error::ModelMismatch);
    }
    let model = &u.model;
    Ok(model.pair(&u.v0, &w.u0) - model.pair(&u.u0, &w.v0))
}

/// The same pairing evaluated at `t`.
pub fn omega_at<R: Real>(u: &Solution<R>, w: &Solution<R>, t: R) -> Result<R> {
    if !u.same_model(w) {
        return Err(Error::ModelMismatch);
    }
    let (uu, uv) = u.evaluate(t)?;
    let (wu, wv) = w.evaluate(t)?;
    Ok(u.model.pair(&uv, &wu) - u.model.pair(&uu, &wv))
}

/// Checks `C B C^{-1} = q^2 B` and `q^2 f(q t) = f(t)` on sample points.
pub fn check_scaling_data<R: Real>(model: &OdeModel<R>, c: &Matrix<R>, q: R) -> Result<()> {
    let lhs = c * &model.coupling;
    let rhs = &model.coupling.scale(&(q * q)) * c;
    let scale = model.coupling.max_abs().max(1.0);
    if lhs.max_abs_diff(&rhs) > 1e-8 * scale * c.max_abs().max(1.0) {
        return Err(Error::InvalidModel("C does not satisfy C B C^-1 = q^2 B".into()));
    }
    let samples: Vec<R> = (0..8).map(|i| R::lit(0.37 + 0.61 * i as f64)).collect();
    if model.f.symmetry_defect(q, &samples) > R::lit(1e-9) {
        return Err(Error::InvalidModel("f does not satisfy q^2 f(q t) = f(t)".into()));
    }
    Ok(())
}

/// `t -> C u((t - p) / q)` as a solution with data at `u.t0`.
pub fn transform<R: Real>(u: &Solution<R>, q: R, p: R, c: &Matrix<R>) -> Result<Solution<R>> {
    let curve = TransformedCurve {
        inner: u.clone(),
        q,
        p,
        c: c.clone(),
    };
    let (u0, v0) = curve.state(u.t0)?;
    Solution::new(u.model.clone(), u.t0, u0, v0)
}

/// `[CT u](t) = C u(t / q)`.
pub fn apply_ct<R: Real>(u: &Solution<R>, c: &Matrix<R>, q: R) -> Result<Solution<R>> {
    check_scaling_data(&u.model, c, q)?;
    transform(u, q, R::zero(), c)
}

/// `(Omega(CTu, CTu'), Omega(u, u') / q, difference)`.
pub fn omega_scaling_check<R: Real>(u: &Solution<R>, w: &Solution<R>, c: &Matrix<R>, q: R) -> Result<(R, R, R)> {
    let lhs = omega(&apply_ct(u, c, q)?, &apply_ct(w, c, q)?)?;
    let rhs = omega(u, w)? / q;
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

/// Matrix of `T` on the scalar solutions of `y'' = f y`.
#[derive(Clone, Debug)]
pub struct ScalarMonodromy<R> {
    /// Columns are the initial data of `T y_a` and `T y_b`, where `y_a`, `y_b`
    /// have initial data `(1, 0)` and `(0, 1)` at `t0`.
    pub matrix: [[R; 2]; 2],
    pub det: R,
    pub mu_plus: Complex<R>,
    pub mu_minus: Complex<R>,
    /// Initial data `(y(t0), y'(t0))` of eigen-solutions for real eigenvalues,
    /// normalized so `y(t0) = 1` when possible.
    pub eigen_data: Option<([R; 2], [R; 2])>,
}

impl<R: Real> ScalarMonodromy<R> {
    pub fn product_defect(&self, q: R) -> R {
        (self.mu_plus * self.mu_minus - Complex::new(R::one() / q, R::zero())).norm()
    }

    pub fn det_defect(&self, q: R) -> R {
        (self.det - R::one() / q).abs()
    }

    pub fn real_mu(&self) -> Option<(R, R)> {
        self.eigen_data.map(|_| (self.mu_plus.re, self.mu_minus.re))
    }
}

pub fn scalar_monodromy<R: Real>(f: &HomogeneityFunction<R>, q: R, t0: R) -> Result<ScalarMonodromy<R>> {
    scalar_monodromy_via(f, q, t0, EvalPath::ClosedForm)
}

pub fn scalar_monodromy_via<R: Real>(
    f: &HomogeneityFunction<R>,
    q: R,
    t0: R,
    path: EvalPath,
) -> Result<ScalarMonodromy<R>> {
    if !(q > R::zero()) || q == R::one() {
        return Err(Error::BadScale(format!("{q}")));
    }
    let model = OdeModel::with_path(Matrix::identity(1), Matrix::zeros(1, 1), f.clone(), path)?;
    let ya = Solution::new(model.clone(), t0, vec![R::one()], vec![R::zero()])?;
    let yb = Solution::new(model, t0, vec![R::zero()], vec![R::one()])?;
    let s = t0 / q;
    let (a0, a1) = ya.evaluate(s)?;
    let (b0, b1) = yb.evaluate(s)?;
    let matrix = [[a0[0], b0[0]], [a1[0] / q, b1[0] / q]];
    let tr = matrix[0][0] + matrix[1][1];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let disc = Complex::new(tr * tr - R::lit(4.0) * det, R::zero()).sqrt();
    let half = R::lit(0.5);
    let r1 = (Complex::new(tr, R::zero()) + disc) * half;
    let r2 = (Complex::new(tr, R::zero()) - disc) * half;
    if ![r1.re, r1.im, r2.re, r2.im].iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical(format!("monodromy eigenvalues are not finite (trace {tr}, det {det})")));
    }
    let key = |z: &Complex<R>| (z.norm(), z.arg());
    let (mu_plus, mu_minus) = if key(&r1) <= key(&r2) { (r1, r2) } else { (r2, r1) };
    let eigen_data = if disc.im == R::zero() && mu_plus != mu_minus {
        let vec_for = |mu: R| -> [R; 2] {
            // (M - mu) v = 0 with v = (1, x) or (0, 1)
            let (p, r) = (matrix[0][0] - mu, matrix[0][1]);
            let (s2, u2) = (matrix[1][0], matrix[1][1] - mu);
            if r.abs() > p.abs().max(s2.abs()).max(u2.abs()) * R::lit(1e-14) {
                [R::one(), -p / r]
            } else if u2.abs() > R::lit(1e-14) {
                [R::one(), -s2 / u2]
            } else {
                [R::zero(), R::one()]
            }
        };
        Some((vec_for(mu_plus.re), vec_for(mu_minus.re)))
    } else {
        None
    };
    Ok(ScalarMonodromy {
        matrix,
        det,
        mu_plus,
        mu_minus,
        eigen_data,
    })
}

/// `u+_1, u-_1, ..., u+_m, u-_m` with `u+-_j = y+- e_j + (terms in e_1..e_{j-1})`.
#[derive(Clone, Debug)]
pub struct TriangularBasis<R> {
    pub elements: Vec<Solution<R>>,
    /// `lambda+-_j = q^{m+1-2j} mu+-`, in the order of `elements`.
    pub labels: Vec<R>,
    pub mu: (R, R),
    pub q: R,
}

/// Builds the basis from a frame `e_1..e_m` (columns of `frame`) with
/// `B e_j` proportional to `e_{j-1}`; the lower-order corrections start from
/// zero initial data, so `u+-_j` has data `(y+-(t0) e_j, y+-'(t0) e_j)`.
pub fn triangular_basis<R: Real>(model: &Arc<OdeModel<R>>, q: R, frame: &Matrix<R>) -> Result<TriangularBasis<R>> {
    let m = model.dim();
    let t0 = R::one();
    let mono = scalar_monodromy_via(&model.f, q, t0, model.path)?;
    let (yp, ym) = mono.eigen_data.ok_or_else(|| {
        Error::Hypothesis("monodromy eigenvalues are complex or repeated; no real triangular basis".into())
    })?;
    let (mu_p, mu_m) = (mono.mu_plus.re, mono.mu_minus.re);
    let mut elements = Vec::with_capacity(2 * m);
    let mut labels = Vec::with_capacity(2 * m);
    for j in 1..=m {
        let e = frame.column(j - 1);
        let scale = int_power(&q, m as i64 + 1 - 2 * j as i64);
        for (y, mu) in [(yp, mu_p), (ym, mu_m)] {
            let u0 = e.iter().map(|x| *x * y[0]).collect();
            let v0 = e.iter().map(|x| *x * y[1]).collect();
            elements.push(Solution::new(model.clone(), t0, u0, v0)?);
            labels.push(scale * mu);
        }
    }
    Ok(TriangularBasis {
        elements,
        labels,
        mu: (mu_p, mu_m),
        q,
    })
}

impl<R: Real> TriangularBasis<R> {
    fn data_matrix(&self) -> Matrix<R> {
        let cols: Vec<Vec<R>> = self
            .elements
            .iter()
            .map(|s| s.u0.iter().chain(&s.v0).copied().collect())
            .collect();
        Matrix::from_columns(&cols)
    }

    /// Coordinates of `u` in this basis.
    pub fn coordinates(&self, u: &Solution<R>) -> Result<Vec<R>> {
        let u = if u.t0 == R::one() { u.clone() } else { u.rebased(R::one())? };
        let data: Vec<R> = u.u0.iter().chain(&u.v0).copied().collect();
        self.data_matrix()
            .solve(&data)
            .ok_or_else(|| Error::Numerical("triangular basis is singular".into()))
    }

    /// Matrix of `CT` in this basis.
    pub fn ct_matrix(&self, c: &Matrix<R>) -> Result<Matrix<R>> {
        let n = self.elements.len();
        let mut out = Matrix::zeros(n, n);
        for (j, b) in self.elements.iter().enumerate() {
            let x = self.coordinates(&apply_ct(b, c, self.q)?)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    /// `Omega(b_i, b_j)`.
    pub fn omega_gram(&self) -> Result<Matrix<R>> {
        let n = self.elements.len();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = omega(&self.elements[i], &self.elements[j])?;
            }
        }
        Ok(out)
    }
}

/// Largest strictly-below-diagonal magnitude.
pub fn below_diagonal_max<R: Real>(m: &Matrix<R>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..i.min(m.cols()) {
            worst = worst.max(m[(i, j)].magnitude());
        }
    }
    worst
}

/// Largest relative deviation of the diagonal from `expected`.
pub fn diagonal_relative_defect<R: Real>(m: &Matrix<R>, expected: &[R]) -> f64 {
    expected
        .iter()
        .enumerate()
        .map(|(i, e)| (m[(i, i)] - *e).magnitude() / e.magnitude().max(1e-300))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaPattern {
    pub gram: Vec<Vec<f64>>,
    /// Both eigenvalues are integer powers of `q`.
    pub hypothesis_holds: bool,
    /// Largest `|Omega(u+-_i, u+-_j)|`.
    pub same_sign_max: f64,
    /// Largest `|Omega(u+-_i, u-+_j)|` with `i + j != m + 1`.
    pub off_antidiagonal_max: f64,
    /// Smallest `|Omega(u+-_i, u-+_j)|` with `i + j = m + 1`.
    pub antidiagonal_min: f64,
    pub warning: Option<String>,
}

impl OmegaPattern {
    pub fn holds(&self, zero_tol: f64, nonzero_min: f64) -> bool {
        self.same_sign_max < zero_tol && self.off_antidiagonal_max < zero_tol && self.antidiagonal_min > nonzero_min
    }
}

/// Exponent `e` with `x = q^e` if it is an integer within `tol`.
pub fn integer_exponent<R: Real>(x: R, q: R, tol: f64) -> Option<i64> {
    if !(x > R::zero()) {
        return None;
    }
    let e = Scalar::to_f64(&(x.ln() / q.ln()));
    ((e - e.round()).abs() < tol).then_some(e.round() as i64)
}

pub fn omega_pattern<R: Real>(basis: &TriangularBasis<R>) -> Result<OmegaPattern> {
    let gram = basis.omega_gram()?;
    let n = basis.elements.len();
    let m = n / 2;
    let (mp, mm) = basis.mu;
    let hypothesis_holds =
        integer_exponent(mp, basis.q, 1e-9).is_some() && integer_exponent(mm, basis.q, 1e-9).is_some();
    let (mut same, mut off, mut anti) = (0.0f64, 0.0f64, f64::INFINITY);
    for a in 0..n {
        for b in 0..n {
            let (i, j) = (a / 2 + 1, b / 2 + 1);
            let v = gram[(a, b)].magnitude();
            if a % 2 == b % 2 {
                same = same.max(v);
            } else if i + j == m + 1 {
                anti = anti.min(v);
            } else {
                off = off.max(v);
            }
        }
    }
    let warning = (!hypothesis_holds).then(|| {
        format!("monodromy eigenvalues {mp}, {mm} are not integer powers of q = {}; pattern not asserted", basis.q)
    });
    Ok(OmegaPattern {
        gram: gram.to_rows().iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
        hypothesis_holds,
        same_sign_max: same,
        off_antidiagonal_max: off,
        antidiagonal_min: anti,
        warning,
    })
}

/// Model data in canonical coordinates: `g` is `epsilon` times the
/// antidiagonal, `A` the upper Jordan block, coupling `q^2 A`, and
/// `C = diag(q^{m+1-2j})`.
#[derive(Clone, Debug)]
pub struct CanonicalSetup<R> {
    pub model: Arc<OdeModel<R>>,
    pub a: Matrix<R>,
    pub c: Matrix<R>,
    pub frame: Matrix<R>,
    pub q: R,
}

pub fn canonical_setup<R: Real>(m: usize, epsilon: i32, q: R, f: HomogeneityFunction<R>) -> Result<CanonicalSetup<R>> {
    if m < 2 {
        return Err(Error::InvalidModel("m must be at least 2".into()));
    }
    let e = R::from_i32(epsilon).unwrap();
    let gram = Matrix::from_fn(m, m, |i, j| if i + j == m - 1 { e } else { R::zero() });
    let a = crate::nullforms::jordan_block::<R>(m);
    let c = Matrix::diagonal(&(1..=m).map(|j| int_power(&q, m as i64 + 1 - 2 * j as i64)).collect::<Vec<R>>());
    let model = OdeModel::new(gram, a.scale(&(q * q)), f)?;
    Ok(CanonicalSetup {
        model,
        a,
        c,
        frame: Matrix::identity(m),
        q,
    })
}

/// JSON descriptor `{m, q, epsilon, f: {kind, c}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub m: usize,
    pub q: f64,
    pub epsilon: i32,
    pub f: HomogeneityFunction<f64>,
}

impl ModelDescriptor {
    pub fn build(&self) -> Result<CanonicalSetup<f64>> {
        canonical_setup(self.m, self.epsilon, self.q, self.f.clone())
    }
}

/// JSON descriptor `{t0, u0, v0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDescriptor {
    pub t0: f64,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl SolutionDescriptor {
    pub fn of(sol: &Solution<f64>) -> Self {
        Self {
            t0: sol.t0,
            u0: sol.u0.clone(),
            v0: sol.v0.clone(),
        }
    }

    pub fn build(&self, model: Arc<OdeModel<f64>>) -> Result<Solution<f64>> {
        Solution::new(model, self.t0, self.u0.clone(), self.v0.clone())
    }
}

/// Euclidean dot product, re-exported for callers building sample data.
pub fn euclid<R: Real>(x: &[R], y: &[R]) -> R {
    dot(x, y)
}
