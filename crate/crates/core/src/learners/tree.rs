//! Binary-search learner over an aggregated POVM.
//!
//! Outcomes of a learner's POVM are grouped into solution classes, and the
//! classes are split recursively in halves. Each internal node carries the sum
//! of the POVM elements below it, so one query per level locates a class
//! holding most of the outcome mass.

use crate::error::{invalid_arg, Error, Result};
use crate::oracles::QStatOracle;
use crate::qmath::linalg::{self, ComplexMatrix};
use crate::qmath::states::{Frame, Observable};

use super::{Diagnostics, IterationRecord, LearnerResult};

const POVM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
enum Node {
    Leaf(usize),
    Split {
        left: Box<Node>,
        right: Box<Node>,
        left_element: Observable,
    },
}

/// Aggregated POVM tree over solution classes.
#[derive(Clone, Debug)]
pub struct PovmTree {
    root: Node,
    classes: usize,
    depth: usize,
}

fn build(classes: &[usize], sums: &[ComplexMatrix]) -> Result<(Node, ComplexMatrix, usize)> {
    if classes.len() == 1 {
        return Ok((Node::Leaf(classes[0]), sums[classes[0]].clone(), 0));
    }
    let (l, r) = classes.split_at(classes.len().div_ceil(2));
    let (left, lm, ld) = build(l, sums)?;
    let (right, rm, rd) = build(r, sums)?;
    let node = Node::Split {
        left: Box::new(left),
        right: Box::new(right),
        left_element: Observable::dense(lm.clone())?,
    };
    Ok((node, lm + rm, 1 + ld.max(rd)))
}

impl PovmTree {
    /// `classes` partitions the outcome indices of `povm`; `None` makes every
    /// outcome its own class.
    pub fn new(povm: &[Observable], classes: Option<&[Vec<usize>]>) -> Result<Self> {
        let dim = povm.first().map(|o| o.dim()).unwrap_or(0);
        if dim == 0 || povm.iter().any(|o| o.dim() != dim) {
            return invalid_arg("POVM elements must share a non-zero dimension");
        }
        let mats = povm
            .iter()
            .map(|o| o.matrix())
            .collect::<Result<Vec<_>>>()?;
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (t, m) in mats.iter().enumerate() {
            let eig = linalg::hermitian_eigenvalues(m);
            if eig.first().is_some_and(|l| *l < -POVM_TOL)
                || eig.last().is_some_and(|l| *l > 1.0 + POVM_TOL)
            {
                return Err(Error::InvalidObservable(format!(
                    "POVM element {t} is not between 0 and I"
                )));
            }
            total += m;
        }
        if linalg::max_abs_diff(&total, &linalg::identity(dim)) > 1e-8 {
            return Err(Error::InvalidObservable(
                "POVM elements do not sum to the identity".into(),
            ));
        }
        let singletons: Vec<Vec<usize>>;
        let classes = match classes {
            Some(c) => c,
            None => {
                singletons = (0..povm.len()).map(|t| vec![t]).collect();
                &singletons
            }
        };
        let mut seen = vec![false; povm.len()];
        for t in classes.iter().flatten() {
            if *t >= povm.len() || std::mem::replace(&mut seen[*t], true) {
                return invalid_arg("classes must partition the POVM outcomes");
            }
        }
        if seen.iter().any(|s| !s) || classes.iter().any(|c| c.is_empty()) {
            return invalid_arg("classes must partition the POVM outcomes");
        }
        let sums: Vec<ComplexMatrix> = classes
            .iter()
            .map(|c| {
                c.iter()
                    .fold(ComplexMatrix::zeros(dim, dim), |acc, t| acc + &mats[*t])
            })
            .collect();
        let ids: Vec<usize> = (0..classes.len()).collect();
        let (root, _, depth) = build(&ids, &sums)?;
        Ok(PovmTree {
            root,
            classes: classes.len(),
            depth,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// `⌈log₂ |classes|⌉`.
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// `Π_t = (1 − δ)|t⟩⟨t| + δ/(N − 1)(I − |t⟩⟨t|)` on `n` qubits: a POVM whose
/// outcome `t` has probability `1 − δ` on the basis state `|t⟩`.
pub fn noisy_basis_povm(n: usize, delta: f64) -> Result<Vec<Observable>> {
    if n == 0 || n > 12 {
        return invalid_arg("noisy basis POVM needs 1 <= n <= 12");
    }
    if !(0.0..=1.0).contains(&delta) {
        return invalid_arg("delta must lie in [0, 1]");
    }
    let dim = 1usize << n;
    let off = delta / (dim - 1) as f64;
    (0..dim)
        .map(|t| {
            let diag = (0..dim)
                .map(|y| if y == t { 1.0 - delta } else { off })
                .collect();
            Observable::diagonal(diag, Frame::Computational)
        })
        .collect()
}

/// Walks the tree with one query per level and returns the class index.
/// A response in `(δ + τ, 1 − δ − τ)` contradicts the promise that the
/// target class holds mass at least `1 − δ`.
pub fn multicopy_tree_learner(
    oracle: &mut QStatOracle,
    tree: &PovmTree,
    delta: f64,
) -> Result<LearnerResult<usize>> {
    let tau = oracle.tolerance();
    if !(delta >= 0.0 && delta + tau < 0.5) {
        return invalid_arg("tree learning needs delta + tau < 1/2");
    }
    let start = oracle.query_count();
    let mut diag = Diagnostics::default();
    let mut node = &tree.root;
    let mut level = 0;
    while let Node::Split {
        left,
        right,
        left_element,
    } = node
    {
        let v = oracle.query(left_element)?;
        if v > delta + tau + 1e-12 && v < 1.0 - delta - tau - 1e-12 {
            return Err(Error::InconsistentResponse(format!(
                "aggregated mass {v} at level {level} is neither small nor large"
            )));
        }
        let go_left = v > 0.5;
        diag.iterations.push(IterationRecord {
            step: level,
            query: level,
            response: v,
            prediction: if go_left { 1.0 } else { 0.0 },
            gap: (v - 0.5).abs(),
        });
        node = if go_left { left } else { right };
        level += 1;
    }
    let Node::Leaf(class) = node else {
        unreachable!()
    };
    diag.set("depth", tree.depth as f64);
    Ok(LearnerResult {
        hypothesis: *class,
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics: diag,
    })
}
