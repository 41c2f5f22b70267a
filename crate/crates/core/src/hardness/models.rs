//! Variance of linear, data re-uploading and variational-energy model families.

use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_haar, UnitaryEnsemble};
use crate::error::{check_budget, invalid_arg, Error, Result};
use crate::exec::{
    mean_estimate, sample_many, stream_rng, variance_estimate, Estimate, LabRng, MonteCarlo,
};
use crate::qmath::linalg::{self, C64};
use crate::qmath::pauli::PauliWeyl;
use crate::qmath::states::{Observable, PureState};

use super::variance::{haar_single_copy_variance, VarianceReport};

/// Source of the data states `ρ_x`.
#[derive(Clone, Debug)]
pub enum Encoder {
    /// Uniform over a finite set of encoded states.
    States(Vec<PureState>),
    /// `ρ_x = W|0⟩⟨0|W†` with `W` drawn from an ensemble.
    Design(UnitaryEnsemble),
}

impl Encoder {
    fn dim(&self) -> Result<usize> {
        match self {
            Encoder::States(s) => s
                .first()
                .map(|p| p.dim())
                .ok_or_else(|| Error::InvalidArgument("encoder needs at least one state".into())),
            Encoder::Design(e) => Ok(e.dim()),
        }
    }

    fn sample(&self, rng: &mut LabRng) -> Result<PureState> {
        match self {
            Encoder::States(s) => Ok(s[rand::Rng::random_range(rng, 0..s.len())].clone()),
            Encoder::Design(e) => e.sample_state(&PureState::basis(e.dim(), 0), rng),
        }
    }

    fn descriptor(&self) -> String {
        match self {
            Encoder::States(s) => format!("states[{}]", s.len()),
            Encoder::Design(e) => e.descriptor(),
        }
    }
}

/// `f_φ(x) = tr[ρ_x U_φ† O U_φ]` with `φ` drawn from `variational`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    pub encoder: Encoder,
    pub variational: UnitaryEnsemble,
    pub observable: Observable,
}

/// Which layer of a linear model is assumed to form a 2-design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignMode {
    #[serde(rename = "variational_2design")]
    VariationalDesign,
    #[serde(rename = "encoding_2design")]
    EncodingDesign,
}

/// `E_x Var_φ[f_φ(x)]`, the `L²(D)` variance of the function family, estimated
/// by `½(f_φ(x) − f_φ'(x))²` with independent `φ, φ'`.
pub fn linear_model_variance(
    model: &LinearModel,
    mode: DesignMode,
    mc: MonteCarlo,
) -> Result<VarianceReport> {
    let dim = model.encoder.dim()?;
    linalg::check_dims(dim, model.variational.dim())?;
    linalg::check_dims(dim, model.observable.dim())?;
    model.observable.check_query_norm()?;
    if mc.samples < 2 {
        return invalid_arg("linear model variance needs at least 2 samples");
    }
    let o = match mode {
        DesignMode::VariationalDesign => {
            if matches!(model.variational, UnitaryEnsemble::ExplicitSet { .. }) {
                return invalid_arg(
                    "variational 2-design mode needs a Haar, Clifford or brickwork ensemble",
                );
            }
            model.observable.clone()
        }
        DesignMode::EncodingDesign => {
            if !matches!(model.encoder, Encoder::Design(_)) {
                return invalid_arg("encoding 2-design mode needs an ensemble encoder");
            }
            let shift = model.observable.trace() / dim as f64;
            if shift.abs() > 1e-12 {
                Observable::dense(
                    model.observable.matrix()? - linalg::identity(dim) * C64::new(shift, 0.0),
                )?
            } else {
                model.observable.clone()
            }
        }
    };
    let values: Vec<f64> = sample_many(mc.exec, mc.seed, mc.samples, |rng| {
        let x = model.encoder.sample(rng)?;
        let a = model.variational.sample_state(&x, rng)?;
        let b = model.variational.sample_state(&x, rng)?;
        Ok(0.5 * (o.expectation_vec(a.amplitudes()) - o.expectation_vec(b.amplitudes())).powi(2))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let n = dim as f64;
    let haar_variational = matches!(model.variational, UnitaryEnsemble::Haar { .. });
    let (bound, exact) = match mode {
        DesignMode::VariationalDesign => (
            (1.0 / (n + 1.0), "variational 2-design: 1/(N+1)".to_string()),
            haar_variational.then(|| haar_single_copy_variance(dim, o.trace(), o.hs_norm_sqr())),
        ),
        DesignMode::EncodingDesign => (
            (
                2.0 / (n * (n + 1.0)),
                "encoding 2-design: 2/(N(N+1))".to_string(),
            ),
            haar_variational.then(|| o.hs_norm_sqr() / (n * (n + 1.0))),
        ),
    };
    Ok(VarianceReport::new(
        format!(
            "linear[encoder={}, variational={}]",
            model.encoder.descriptor(),
            model.variational.descriptor()
        ),
        o.tag(),
        1,
        dim,
        mean_estimate(&values),
        bound,
        exact,
    ))
}

/// Data re-uploading model with Haar-random `block`-qubit unitaries on
/// `⌊n/block⌋` disjoint blocks and on-site `R_X(x)` encodings, `depth` layers.
#[derive(Clone, Debug)]
pub struct DataReupload {
    pub n: usize,
    pub block: usize,
    pub depth: usize,
    pub data: Vec<Vec<f64>>,
    pub observable: PauliWeyl,
}

impl DataReupload {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 14 || self.block < 2 || self.block > self.n || self.depth == 0 {
            return invalid_arg("data re-uploading needs 2 <= block <= n <= 14 and depth >= 1");
        }
        if self.observable.n() != self.n || self.observable.is_identity() {
            return invalid_arg("observable must be a non-identity Pauli string on n qubits");
        }
        let f = self.data.first().map(|x| x.len()).unwrap_or(0);
        if f == 0 || self.data.iter().any(|x| x.len() != f) {
            return invalid_arg("data points must share a non-zero feature count");
        }
        Ok(())
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.n / self.block)
            .map(|i| (i * self.block..(i + 1) * self.block).collect())
            .collect()
    }

    /// Blocks of the last layer that meet the support of the observable.
    pub fn support_blocks(&self) -> usize {
        let mask = self.observable.x_mask() | self.observable.z_mask();
        self.blocks()
            .iter()
            .filter(|b| b.iter().any(|q| mask >> (self.n - 1 - q) & 1 == 1))
            .count()
    }

    /// `f_φ(x)` for one draw of the local unitaries.
    fn value(&self, layers: &[Vec<linalg::ComplexMatrix>], x: &[f64]) -> f64 {
        let mut v = PureState::basis(1 << self.n, 0).into_amplitudes();
        let blocks = self.blocks();
        for layer in layers {
            for (qs, u) in blocks.iter().zip(layer) {
                linalg::apply_gate(&mut v, self.n, u, qs);
            }
            for q in 0..self.n {
                let t = x[q % x.len()] / 2.0;
                let rx = linalg::ComplexMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C64::new(t.cos(), 0.0),
                        C64::new(0.0, -t.sin()),
                        C64::new(0.0, -t.sin()),
                        C64::new(t.cos(), 0.0),
                    ],
                );
                linalg::apply_gate(&mut v, self.n, &rx, &[q]);
            }
        }
        self.observable.expectation_vec(&v)
    }

    fn sample_layers(&self, rng: &mut LabRng) -> Result<Vec<Vec<linalg::ComplexMatrix>>> {
        (0..self.depth)
            .map(|_| {
                (0..self.n / self.block)
                    .map(|_| sample_haar(1 << self.block, rng))
                    .collect()
            })
            .collect()
    }
}

/// `E_x Var_φ[f_φ(x)]` for a data re-uploading model with a Pauli-string
/// observable, against `(2K/((K−1)(K+1)))^s` where `K = 2^block` and `s` counts
/// last-layer blocks touching the observable.
pub fn data_reupload_variance(model: &DataReupload, mc: MonteCarlo) -> Result<VarianceReport> {
    model.validate()?;
    if mc.samples < 2 {
        return invalid_arg("variance estimation needs at least 2 samples");
    }
    let values: Vec<f64> = sample_many(mc.exec, mc.seed, mc.samples, |rng| {
        let x = &model.data[rand::Rng::random_range(rng, 0..model.data.len())];
        let a = model.sample_layers(rng)?;
        let b = model.sample_layers(rng)?;
        Ok(0.5 * (model.value(&a, x) - model.value(&b, x)).powi(2))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let s = model.support_blocks();
    let k = (1usize << model.block) as f64;
    let per_block = 2.0 * k / ((k - 1.0) * (k + 1.0));
    let bound = if s == 0 {
        (1.0, "trivial: observable outside every block".to_string())
    } else {
        (
            per_block.powi(s as i32),
            format!("local 2-design: (2K/(K^2-1))^s with K={k}, s={s}"),
        )
    };
    Ok(VarianceReport::new(
        format!(
            "data_reupload[n={}, block={}, depth={}]",
            model.n, model.block, model.depth
        ),
        format!("pauli[{}]", model.observable),
        1,
        1 << model.n,
        mean_estimate(&values),
        bound,
        None,
    ))
}

/// `E_φ Var_{H∼uniform(family)}[tr[ρ_φ H]/c]` against `1/(N+1)`.
pub fn random_init_expected_variance(
    hamiltonians: &[Observable],
    c: f64,
    ansatz: &UnitaryEnsemble,
    mc: MonteCarlo,
) -> Result<VarianceReport> {
    let dim = ansatz.dim();
    if hamiltonians.is_empty() || !(c > 0.0) {
        return invalid_arg("need a non-empty Hamiltonian family and c > 0");
    }
    for h in hamiltonians {
        linalg::check_dims(dim, h.dim())?;
        if h.trace().abs() > 1e-9 * dim as f64 {
            return Err(Error::InvalidObservable(
                "Hamiltonians must be traceless".into(),
            ));
        }
        if h.op_norm() > c * (1.0 + 1e-9) {
            return Err(Error::InvalidObservable(format!(
                "Hamiltonian norm {} exceeds c = {c}",
                h.op_norm()
            )));
        }
    }
    if mc.samples < 2 {
        return invalid_arg("variance estimation needs at least 2 samples");
    }
    let input = PureState::basis(dim, 0);
    let m = hamiltonians.len() as f64;
    let values: Vec<f64> = sample_many(mc.exec, mc.seed, mc.samples, |rng| {
        let psi = ansatz.sample_state(&input, rng)?;
        let e: Vec<f64> = hamiltonians
            .iter()
            .map(|h| h.expectation_vec(psi.amplitudes()) / c)
            .collect();
        let mean = e.iter().sum::<f64>() / m;
        Ok(e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(VarianceReport::new(
        format!("random_init[{}]", ansatz.descriptor()),
        format!("family[{} hamiltonians, c={c}]", hamiltonians.len()),
        1,
        dim,
        mean_estimate(&values),
        (1.0 / (dim as f64 + 1.0), "2-design ansatz: 1/(N+1)".into()),
        None,
    ))
}

/// Both sides of `Var_φ[l^φ(ϑ)] ≤ 4√(Var_φ[f_φ])` for
/// `l^φ(ϑ) = ½E_x(f_φ(x) − f_ϑ(x))²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossVarianceCheck {
    /// `Var_φ[l^φ(ϑ_j)]` for each reference `ϑ_j`.
    pub lhs: Vec<Estimate>,
    pub lhs_max: f64,
    /// `E_x Var_φ[f_φ(x)]`.
    pub function_variance: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Number of reference parameters drawn by [`selflearn_loss_variance_check`].
pub const LOSS_VARIANCE_REFERENCES: usize = 10;

/// Draws `points` inputs from `data` as the distribution `D`, ten reference
/// functions `f_ϑ` and `mc.samples` functions `f_φ` from `family`.
pub fn selflearn_loss_variance_check<X, F>(
    family: impl Fn(&mut LabRng) -> Result<F> + Sync + Send,
    data: impl Fn(&mut LabRng) -> X,
    points: usize,
    mc: MonteCarlo,
) -> Result<LossVarianceCheck>
where
    F: Fn(&X) -> f64,
    X: Sync,
{
    if points == 0 || mc.samples < 3 {
        return invalid_arg("need at least one data point and 3 samples");
    }
    check_budget(
        "function evaluations",
        (points as u128) * (mc.samples as u128),
        1 << 28,
    )?;
    let mut rng = stream_rng(mc.seed, u64::MAX);
    let xs: Vec<X> = (0..points).map(|_| data(&mut rng)).collect();
    let eval = |f: &F| -> Result<Vec<f64>> {
        xs.iter()
            .map(|x| {
                let v = f(x);
                if v.abs() > 1.0 + 1e-9 || !v.is_finite() {
                    Err(Error::InvalidArgument(format!(
                        "function value {v} outside [-1, 1]"
                    )))
                } else {
                    Ok(v)
                }
            })
            .collect()
    };
    let mut rng = stream_rng(mc.seed, u64::MAX - 1);
    let refs = (0..LOSS_VARIANCE_REFERENCES)
        .map(|_| eval(&family(&mut rng)?))
        .collect::<Result<Vec<_>>>()?;
    let fs = sample_many(mc.exec, mc.seed, mc.samples, |rng| eval(&family(rng)?))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let s = fs.len() as f64;
    let p = points as f64;
    let function_variance = (0..points)
        .map(|i| {
            let mean = fs.iter().map(|f| f[i]).sum::<f64>() / s;
            fs.iter().map(|f| (f[i] - mean).powi(2)).sum::<f64>() / (s - 1.0)
        })
        .sum::<f64>()
        / p;
    let rhs = 4.0 * function_variance.max(0.0).sqrt();
    let lhs: Vec<Estimate> = refs
        .iter()
        .map(|g| {
            let losses: Vec<f64> = fs
                .iter()
                .map(|f| 0.5 * f.iter().zip(g).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / p)
                .collect();
            variance_estimate(&losses)
        })
        .collect();
    let lhs_max = lhs
        .iter()
        .map(|e| e.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let holds = lhs.iter().all(|e| e.value <= rhs + 3.0 * e.stderr.max(0.0));
    Ok(LossVarianceCheck {
        lhs,
        lhs_max,
        function_variance,
        rhs,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::haar_state;

    fn z1(n: usize) -> Observable {
        Observable::pauli(PauliWeyl::single(n, 0, 'Z').unwrap())
    }

    #[test]
    fn identity_observable_has_no_variance() {
        let m = LinearModel {
            encoder: Encoder::Design(UnitaryEnsemble::Haar { dim: 8 }),
            variational: UnitaryEnsemble::Haar { dim: 8 },
            observable: Observable::identity(8),
        };
        let r = linear_model_variance(&m, DesignMode::VariationalDesign, MonteCarlo::new(100, 1))
            .unwrap();
        assert!(r.estimate.abs() < 1e-12);
    }

    #[test]
    fn variational_mode_matches_closed_form() {
        let m = LinearModel {
            encoder: Encoder::States(vec![PureState::basis(16, 3)]),
            variational: UnitaryEnsemble::Haar { dim: 16 },
            observable: z1(4),
        };
        let r = linear_model_variance(
            &m,
            DesignMode::VariationalDesign,
            MonteCarlo::new(20_000, 2),
        )
        .unwrap();
        assert!((r.exact.unwrap() - 1.0 / 17.0).abs() < 1e-12);
        assert!((r.estimate - 1.0 / 17.0).abs() < 5.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn data_reupload_bound_counts_support() {
        let m = DataReupload {
            n: 4,
            block: 2,
            depth: 2,
            data: vec![vec![0.1, 0.7], vec![-0.5, 1.1]],
            observable: PauliWeyl::from_label("ZIIZ").unwrap(),
        };
        assert_eq!(m.support_blocks(), 2);
        let r = data_reupload_variance(&m, MonteCarlo::new(2000, 3)).unwrap();
        assert!((r.analytic_bound - (8.0f64 / 15.0).powi(2)).abs() < 1e-12);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn singleton_family_is_flat() {
        let r = random_init_expected_variance(
            &[z1(3)],
            1.0,
            &UnitaryEnsemble::Haar { dim: 8 },
            MonteCarlo::new(50, 4),
        )
        .unwrap();
        assert_eq!(r.estimate, 0.0);
        let bad = Observable::identity(8);
        assert!(random_init_expected_variance(
            &[bad],
            1.0,
            &UnitaryEnsemble::Haar { dim: 8 },
            MonteCarlo::new(50, 4)
        )
        .is_err());
    }

    #[test]
    fn two_point_family() {
        let r = selflearn_loss_variance_check(
            |rng| {
                let s = if rand::Rng::random_bool(rng, 0.5) {
                    1.0
                } else {
                    -1.0
                };
                Ok(move |_: &()| s)
            },
            |_| (),
            4,
            MonteCarlo::new(4000, 5),
        )
        .unwrap();
        assert!((r.function_variance - 1.0).abs() < 0.01);
        assert!((r.rhs - 4.0).abs() < 0.03);
        assert!(r.holds);
        let c =
            selflearn_loss_variance_check(|_| Ok(|_: &()| 0.5), |_| (), 4, MonteCarlo::new(50, 5))
                .unwrap();
        assert_eq!((c.lhs_max, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn linear_family_loss_variance_is_bounded() {
        let o = z1(3);
        let r = selflearn_loss_variance_check(
            |rng| {
                let u = sample_haar(8, rng)?;
                let o = o.clone();
                Ok(move |x: &PureState| {
                    o.expectation_vec(x.apply(&u).expect("dimension 8").amplitudes())
                })
            },
            |rng| haar_state(8, rng),
            16,
            MonteCarlo::new(400, 6),
        )
        .unwrap();
        assert!(r.holds && r.lhs_max <= r.rhs, "{r:?}");
    }
}
