use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};

/// `b = ⌈ln(1/δ') / (2γ²)⌉` repetitions for a `(½ + γ)`-learner to reach
/// failure probability `δ'`.
pub fn boost_repetitions(gamma: f64, delta_prime: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma <= 0.5) || !(delta_prime > 0.0 && delta_prime < 1.0) {
        return invalid_arg("boosting needs 0 < gamma <= 1/2 and 0 < delta' < 1");
    }
    Ok(((1.0 / delta_prime).ln() / (2.0 * gamma * gamma)).ceil() as usize)
}

/// Result of a boosted run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoostOutcome<T> {
    pub target: T,
    /// Index of the source whose solution set covered the majority.
    pub source_index: usize,
    pub votes: usize,
    pub runs: usize,
    pub queries: usize,
}

/// Runs `base` `b` times and returns an output lying in the solution set of
/// the first source that contains at least `⌈b/2⌉` of the outputs.
///
/// `base(run)` returns a target and the number of queries it spent.
pub fn boost<S, T: Clone>(
    b: usize,
    sources: &[S],
    solves: impl Fn(&S, &T) -> bool,
    mut base: impl FnMut(usize) -> Result<(T, usize)>,
) -> Result<BoostOutcome<T>> {
    if b == 0 {
        return invalid_arg("boosting needs at least one run");
    }
    let mut outputs = Vec::with_capacity(b);
    let mut queries = 0;
    for run in 0..b {
        let (t, q) = base(run)?;
        outputs.push(t);
        queries += q;
    }
    let need = b.div_ceil(2);
    for (source_index, s) in sources.iter().enumerate() {
        let hits: Vec<&T> = outputs.iter().filter(|t| solves(s, t)).collect();
        if hits.len() >= need {
            return Ok(BoostOutcome {
                target: hits[0].clone(),
                source_index,
                votes: hits.len(),
                runs: b,
                queries,
            });
        }
    }
    Err(Error::LearnerFailure(format!(
        "no source covers {need} of {b} outputs"
    )))
}
