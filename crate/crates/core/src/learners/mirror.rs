//! Mirror maps, Bregman divergences and the mirror-descent update.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};
use crate::qmath::linalg::{self, ComplexMatrix, C64};

/// A point of the primal space or a linear functional on it.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Vector(Vec<f64>),
    Hermitian(ComplexMatrix),
}

impl Point {
    pub fn uniform(len: usize) -> Point {
        Point::Vector(vec![1.0 / len as f64; len])
    }

    pub fn maximally_mixed(dim: usize) -> Point {
        Point::Hermitian(linalg::identity(dim) * C64::new(1.0 / dim as f64, 0.0))
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            Point::Hermitian(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&ComplexMatrix> {
        match self {
            Point::Hermitian(m) => Some(m),
            Point::Vector(_) => None,
        }
    }

    /// `⟨g, x⟩`, i.e. `Σ g_i x_i` or `Re tr[g x]`.
    pub fn pair(&self, x: &Point) -> Result<f64> {
        match (self, x) {
            (Point::Vector(g), Point::Vector(x)) if g.len() == x.len() => {
                Ok(g.iter().zip(x).map(|(a, b)| a * b).sum())
            }
            (Point::Hermitian(g), Point::Hermitian(x)) if g.shape() == x.shape() => {
                Ok(linalg::trace_product(g, x).re)
            }
            _ => invalid_arg("pairing of incompatible points"),
        }
    }

    fn scaled(&self, s: f64) -> Point {
        match self {
            Point::Vector(v) => Point::Vector(v.iter().map(|x| x * s).collect()),
            Point::Hermitian(m) => Point::Hermitian(m * C64::new(s, 0.0)),
        }
    }

    fn sub(&self, other: &Point) -> Result<Point> {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => {
                Ok(Point::Vector(a.iter().zip(b).map(|(x, y)| x - y).collect()))
            }
            (Point::Hermitian(a), Point::Hermitian(b)) if a.shape() == b.shape() => {
                Ok(Point::Hermitian(a - b))
            }
            _ => invalid_arg("difference of incompatible points"),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Point::Vector(v) => v.iter().all(|x| x.is_finite()),
            Point::Hermitian(m) => m.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }
}

/// Regularizers `R` generating the mirror maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorMap {
    /// `Σ x_i ln x_i` on probability vectors, 1-strongly convex for `ℓ₁`.
    NegEntropy,
    /// `½‖x‖₂²`, 1-strongly convex for `ℓ₂`.
    SquaredNorm,
    /// `tr[X log₂ X]` on density matrices, `1/ln 2`-strongly convex for the
    /// trace norm.
    VonNeumann,
}

/// Eigen-decomposition based `f(H)` for a Hermitian matrix.
fn spectral(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    linalg::hermitian_function(m, |x| C64::new(f(x), 0.0))
}

fn safe_ln(x: f64) -> f64 {
    x.max(1e-300).ln()
}

/// `exp(Y) / tr exp(Y)`, shifted to avoid overflow.
fn normalized_exp(y: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitian_part(y));
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut out = ComplexMatrix::zeros(y.nrows(), y.ncols());
    for (k, wk) in w.iter().enumerate() {
        let col = vecs.column(k);
        out += col * col.adjoint() * C64::new(wk / z, 0.0);
    }
    out
}

impl MirrorMap {
    /// Strong-convexity constant `ζ` with respect to [`MirrorMap::primal_norm`].
    pub fn zeta(self) -> f64 {
        match self {
            MirrorMap::NegEntropy | MirrorMap::SquaredNorm => 1.0,
            MirrorMap::VonNeumann => 1.0 / LN_2,
        }
    }

    pub fn primal_norm(self, x: &Point) -> f64 {
        match (self, x) {
            (MirrorMap::NegEntropy, Point::Vector(v)) => v.iter().map(|a| a.abs()).sum(),
            (_, Point::Vector(v)) => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            (MirrorMap::SquaredNorm, Point::Hermitian(m)) => linalg::frobenius_norm(m),
            (_, Point::Hermitian(m)) => linalg::trace_norm(m),
        }
    }

    /// Norm dual to [`MirrorMap::primal_norm`].
    pub fn dual_norm(self, g: &Point) -> f64 {
        match (self, g) {
            (MirrorMap::NegEntropy, Point::Vector(v)) => {
                v.iter().fold(0.0, |m, a| f64::max(m, a.abs()))
            }
            (_, Point::Vector(v)) => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            (MirrorMap::SquaredNorm, Point::Hermitian(m)) => linalg::frobenius_norm(m),
            (_, Point::Hermitian(m)) => linalg::op_norm(m),
        }
    }

    /// `∇R(x)`.
    pub fn gradient(self, x: &Point) -> Result<Point> {
        Ok(match (self, x) {
            (MirrorMap::NegEntropy, Point::Vector(v)) => {
                Point::Vector(v.iter().map(|a| safe_ln(*a) + 1.0).collect())
            }
            (MirrorMap::SquaredNorm, p) => p.clone(),
            (MirrorMap::VonNeumann, Point::Hermitian(m)) => {
                Point::Hermitian(spectral(m, |a| safe_ln(a) / LN_2 + 1.0 / LN_2))
            }
            _ => return invalid_arg(format!("{self:?} is not defined on this point type")),
        })
    }

    /// `(∇R)^{-1}(y)`.
    pub fn inverse_gradient(self, y: &Point) -> Result<Point> {
        Ok(match (self, y) {
            (MirrorMap::NegEntropy, Point::Vector(v)) => {
                Point::Vector(v.iter().map(|a| (a - 1.0).exp()).collect())
            }
            (MirrorMap::SquaredNorm, p) => p.clone(),
            (MirrorMap::VonNeumann, Point::Hermitian(m)) => {
                Point::Hermitian(spectral(m, |a| (a * LN_2 - 1.0).exp()))
            }
            _ => return invalid_arg(format!("{self:?} is not defined on this point type")),
        })
    }

    /// `D_R(x, y) = R(x) − R(y) − ⟨∇R(y), x − y⟩`.
    pub fn bregman(self, x: &Point, y: &Point) -> Result<f64> {
        match (self, x, y) {
            (MirrorMap::NegEntropy, Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => {
                let mut d = 0.0;
                for (p, q) in a.iter().zip(b) {
                    if *p > 0.0 {
                        if *q <= 0.0 {
                            return Ok(f64::INFINITY);
                        }
                        d += p * (p / q).ln();
                    }
                    d += q - p;
                }
                Ok(d.max(0.0))
            }
            (MirrorMap::SquaredNorm, _, _) => {
                let diff = x.sub(y)?;
                Ok(0.5 * self.dual_norm(&diff).powi(2))
            }
            (MirrorMap::VonNeumann, Point::Hermitian(a), Point::Hermitian(b))
                if a.shape() == b.shape() =>
            {
                let xlogx: f64 = linalg::hermitian_eigenvalues(a)
                    .into_iter()
                    .filter(|l| *l > 0.0)
                    .map(|l| l * l.ln())
                    .sum();
                let xlogy = linalg::trace_product(a, &spectral(b, safe_ln)).re;
                let d = (xlogx - xlogy - (linalg::trace(a).re - linalg::trace(b).re)) / LN_2;
                Ok(d.max(0.0))
            }
            _ => invalid_arg("Bregman divergence of incompatible points"),
        }
    }
}

/// Constraint set `K` with its Bregman projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Simplex,
    DensityMatrices,
    Unconstrained,
}

/// Euclidean projection onto the probability simplex.
fn project_simplex_l2(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

impl Constraint {
    /// `Π^R_K(y)`.
    pub fn project(self, map: MirrorMap, y: Point) -> Result<Point> {
        match (self, map, y) {
            (Constraint::Unconstrained, _, y) => Ok(y),
            (Constraint::Simplex, MirrorMap::NegEntropy, Point::Vector(v)) => {
                let z: f64 = v.iter().sum();
                if !(z > 0.0 && z.is_finite()) {
                    return Err(Error::LearnerFailure(
                        "entropic projection of a null vector".into(),
                    ));
                }
                Ok(Point::Vector(v.into_iter().map(|x| x / z).collect()))
            }
            (Constraint::Simplex, MirrorMap::SquaredNorm, Point::Vector(v)) => {
                Ok(Point::Vector(project_simplex_l2(&v)))
            }
            (Constraint::DensityMatrices, MirrorMap::VonNeumann, Point::Hermitian(m)) => {
                let z = linalg::trace(&m).re;
                if !(z > 0.0 && z.is_finite()) {
                    return Err(Error::LearnerFailure(
                        "trace projection of a null matrix".into(),
                    ));
                }
                Ok(Point::Hermitian(
                    linalg::hermitian_part(&m) * C64::new(1.0 / z, 0.0),
                ))
            }
            (c, m, _) => invalid_arg(format!("no Bregman projection for {m:?} onto {c:?}")),
        }
    }

    pub fn contains(self, x: &Point, tol: f64) -> bool {
        match (self, x) {
            (Constraint::Unconstrained, _) => true,
            (Constraint::Simplex, Point::Vector(v)) => {
                v.iter().all(|a| *a >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            (Constraint::DensityMatrices, Point::Hermitian(m)) => {
                linalg::is_hermitian(m, tol)
                    && (linalg::trace(m).re - 1.0).abs() <= tol
                    && linalg::hermitian_eigenvalues(m)
                        .first()
                        .is_some_and(|l| *l >= -tol)
            }
            _ => false,
        }
    }
}

/// State of a mirror-descent run.
#[derive(Clone, Debug, PartialEq)]
pub struct MDState {
    pub map: MirrorMap,
    pub constraint: Constraint,
    pub iterate: Point,
    pub initial: Point,
    pub eta: f64,
    pub t: usize,
}

impl MDState {
    pub fn new(map: MirrorMap, constraint: Constraint, initial: Point, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return invalid_arg("step size must be positive");
        }
        if !constraint.contains(&initial, 1e-9) {
            return invalid_arg("initial point lies outside the constraint set");
        }
        Ok(MDState {
            map,
            constraint,
            iterate: initial.clone(),
            initial,
            eta,
            t: 0,
        })
    }

    /// `D_R(f, f₁)`.
    pub fn divergence_from_start(&self, f: &Point) -> Result<f64> {
        self.map.bregman(f, &self.initial)
    }
}

/// `f_{t+1} = Π((∇R)^{-1}(∇R(f_t) − η g))`.
pub fn md_update(state: &MDState, g: &Point) -> Result<MDState> {
    if !g.is_finite() {
        return invalid_arg("mirror-descent direction must be finite");
    }
    let step = g.scaled(state.eta);
    let y = match (state.map, &state.iterate, &step) {
        // Multiplicative form of the entropic step; keeps zero coordinates at zero.
        (MirrorMap::NegEntropy, Point::Vector(f), Point::Vector(s)) if f.len() == s.len() => {
            Point::Vector(f.iter().zip(s).map(|(x, e)| x * (-e).exp()).collect())
        }
        (MirrorMap::VonNeumann, Point::Hermitian(f), Point::Hermitian(s))
            if f.shape() == s.shape() =>
        {
            let logf = spectral(f, safe_ln);
            Point::Hermitian(normalized_exp(&(logf - s * C64::new(LN_2, 0.0))))
        }
        (map, f, _) => {
            let dual = map.gradient(f)?.sub(&step)?;
            map.inverse_gradient(&dual)?
        }
    };
    let iterate = state.constraint.project(state.map, y)?;
    if !iterate.is_finite() {
        return Err(Error::LearnerFailure(
            "mirror-descent iterate diverged".into(),
        ));
    }
    Ok(MDState {
        iterate,
        t: state.t + 1,
        ..state.clone()
    })
}

/// Measured average regret against the bound `D/(ηT) + η/(2ζ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegretAudit {
    pub rounds: usize,
    pub average_regret: f64,
    pub divergence: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Audits `(1/T) Σ (⟨g_t, f_t⟩ − ⟨g_t, f⟩)` for the comparator `f`, where
/// `f_1` is the first iterate.
pub fn regret_audit(
    gs: &[Point],
    fs: &[Point],
    comparator: &Point,
    map: MirrorMap,
    eta: f64,
) -> Result<RegretAudit> {
    if gs.is_empty() || gs.len() != fs.len() {
        return invalid_arg("regret audit needs one iterate per linear function");
    }
    if !(eta > 0.0) {
        return invalid_arg("step size must be positive");
    }
    let mut total = 0.0;
    for (g, f) in gs.iter().zip(fs) {
        let norm = map.dual_norm(g);
        if norm > 1.0 + 1e-9 {
            return invalid_arg(format!("linear function has dual norm {norm} > 1"));
        }
        total += g.pair(f)? - g.pair(comparator)?;
    }
    let rounds = gs.len();
    let divergence = map.bregman(comparator, &fs[0])?;
    let average_regret = total / rounds as f64;
    let bound = divergence / (eta * rounds as f64) + eta / (2.0 * map.zeta());
    Ok(RegretAudit {
        rounds,
        average_regret,
        divergence,
        bound,
        holds: average_regret <= bound + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;
    use rand::Rng;

    fn random_simplex(rng: &mut crate::LabRng, n: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let z: f64 = v.iter().sum();
        v.into_iter().map(|x| x / z).collect()
    }

    fn random_density(rng: &mut crate::LabRng, n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let t = linalg::trace(&m);
        m / t
    }

    #[test]
    fn zero_direction_keeps_iterate() {
        for (map, c, p) in [
            (
                MirrorMap::NegEntropy,
                Constraint::Simplex,
                Point::Vector(vec![0.2, 0.3, 0.5]),
            ),
            (
                MirrorMap::SquaredNorm,
                Constraint::Simplex,
                Point::Vector(vec![0.2, 0.3, 0.5]),
            ),
            (
                MirrorMap::VonNeumann,
                Constraint::DensityMatrices,
                Point::maximally_mixed(2),
            ),
        ] {
            let s = MDState::new(map, c, p.clone(), 0.3).unwrap();
            let zero = match &p {
                Point::Vector(v) => Point::Vector(vec![0.0; v.len()]),
                Point::Hermitian(m) => Point::Hermitian(m * C64::new(0.0, 0.0)),
            };
            let next = md_update(&s, &zero).unwrap();
            match (&next.iterate, &p) {
                (Point::Vector(a), Point::Vector(b)) => {
                    assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12))
                }
                (Point::Hermitian(a), Point::Hermitian(b)) => {
                    assert!(linalg::max_abs_diff(a, b) < 1e-12)
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn entropic_step_is_multiplicative_weights() {
        let f = vec![0.1, 0.2, 0.3, 0.4];
        let g = vec![1.0, -0.5, 0.0, 0.25];
        let eta = 0.7;
        let s = MDState::new(
            MirrorMap::NegEntropy,
            Constraint::Simplex,
            Point::Vector(f.clone()),
            eta,
        )
        .unwrap();
        let next = md_update(&s, &Point::Vector(g.clone())).unwrap();
        let w: Vec<f64> = f
            .iter()
            .zip(&g)
            .map(|(x, e)| x * (-eta * e).exp())
            .collect();
        let z: f64 = w.iter().sum();
        for (a, b) in next.iterate.as_vector().unwrap().iter().zip(&w) {
            assert!((a - b / z).abs() < 1e-15);
        }
    }

    #[test]
    fn squared_norm_is_projected_gradient_step() {
        let s = MDState::new(
            MirrorMap::SquaredNorm,
            Constraint::Simplex,
            Point::Vector(vec![0.5, 0.5]),
            1.0,
        )
        .unwrap();
        let next = md_update(&s, &Point::Vector(vec![1.0, -1.0])).unwrap();
        assert_eq!(next.iterate.as_vector().unwrap(), &[0.0, 1.0]);
        let free = MDState::new(
            MirrorMap::SquaredNorm,
            Constraint::Unconstrained,
            Point::Vector(vec![0.5, 0.5]),
            0.1,
        )
        .unwrap();
        let next = md_update(&free, &Point::Vector(vec![1.0, -1.0])).unwrap();
        assert!((next.iterate.as_vector().unwrap()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn bregman_dominates_strong_convexity() {
        let mut rng = stream_rng(21, 0);
        for _ in 0..50 {
            let (a, b) = (random_simplex(&mut rng, 5), random_simplex(&mut rng, 5));
            let (x, y) = (Point::Vector(a), Point::Vector(b));
            for map in [MirrorMap::NegEntropy, MirrorMap::SquaredNorm] {
                assert_eq!(map.bregman(&x, &x).unwrap(), 0.0);
                let d = map.bregman(&x, &y).unwrap();
                assert!(
                    d >= map.zeta() / 2.0 * map.primal_norm(&x.sub(&y).unwrap()).powi(2) - 1e-12
                );
            }
            let (x, y) = (
                Point::Hermitian(random_density(&mut rng, 3)),
                Point::Hermitian(random_density(&mut rng, 3)),
            );
            let map = MirrorMap::VonNeumann;
            assert!(map.bregman(&x, &x).unwrap().abs() < 1e-10);
            let d = map.bregman(&x, &y).unwrap();
            assert!(d >= map.zeta() / 2.0 * map.primal_norm(&x.sub(&y).unwrap()).powi(2) - 1e-10);
        }
    }

    #[test]
    fn von_neumann_update_stays_a_state() {
        let mut rng = stream_rng(22, 0);
        let mut s = MDState::new(
            MirrorMap::VonNeumann,
            Constraint::DensityMatrices,
            Point::maximally_mixed(3),
            0.4,
        )
        .unwrap();
        for _ in 0..20 {
            let g = crate::ensembles::random_hermitian(3, &mut rng);
            let g = &g / C64::new(linalg::op_norm(&g), 0.0);
            s = md_update(&s, &Point::Hermitian(g)).unwrap();
            assert!(Constraint::DensityMatrices.contains(&s.iterate, 1e-9));
        }
        assert_eq!(s.t, 20);
    }

    #[test]
    fn zero_sequence_has_zero_regret() {
        let f = Point::uniform(3);
        let gs = vec![Point::Vector(vec![0.0; 3]); 10];
        let fs = vec![f.clone(); 10];
        let a = regret_audit(
            &gs,
            &fs,
            &Point::Vector(vec![1.0, 0.0, 0.0]),
            MirrorMap::NegEntropy,
            0.1,
        )
        .unwrap();
        assert_eq!(a.average_regret, 0.0);
        assert!(a.holds);
        let big = vec![Point::Vector(vec![2.0, 0.0, 0.0]); 10];
        assert!(regret_audit(&big, &fs, &f, MirrorMap::NegEntropy, 0.1).is_err());
    }
}
