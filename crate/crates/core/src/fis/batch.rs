//! Page-batched Mamdani engine.
//!
//! `N_p` controllers that share one rule table and one set of universes are
//! stored as flat corner arrays (page-major), and every stage maps whole
//! `N_p x ...` blocks at once:
//!
//! 1. fuzzification: `N_p x N_inp` inputs to one `N_p x N_ti,k` membership
//!    block per input,
//! 2. inference: per rule, the min over antecedent memberships, then per
//!    output set the max over the rules that map to it (`N_p x N_to`),
//! 3. defuzzification: clip each output set's sampled membership at its
//!    activation, merge by max and take the discrete centroid.
//!
//! Output-set membership over the `N_dis` grid does not depend on the
//! inputs, so it is sampled once when the batch is built.

use std::sync::Arc;

use super::set::trapezoid;
use super::spec::{discretize, FisSpec, RuleTable};
use super::FisError;
use crate::exec::Exec;

/// Memberships of one input variable for every page, `N_p x N_ti,k`
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipBatch {
    n_pages: usize,
    n_sets: usize,
    values: Vec<f64>,
}

impl MembershipBatch {
    pub fn n_pages(&self) -> usize {
        self.n_pages
    }

    pub fn n_sets(&self) -> usize {
        self.n_sets
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn page(&self, p: usize) -> &[f64] {
        &self.values[p * self.n_sets..(p + 1) * self.n_sets]
    }
}

/// Output-set activations, `N_p x N_to` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    n_pages: usize,
    n_sets: usize,
    values: Vec<f64>,
}

impl Activations {
    pub fn new(n_pages: usize, n_sets: usize, values: Vec<f64>) -> Result<Self, FisError> {
        if values.len() != n_pages * n_sets {
            return Err(FisError::Dimension {
                what: "activation matrix",
                expected: n_pages * n_sets,
                got: values.len(),
            });
        }
        Ok(Self {
            n_pages,
            n_sets,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn page(&self, p: usize) -> &[f64] {
        &self.values[p * self.n_sets..(p + 1) * self.n_sets]
    }
}

/// Rule table flattened to zero-based column vectors.
#[derive(Debug)]
struct FlatRules {
    n_rules: usize,
    antecedents: Vec<Vec<u16>>,
    consequents: Vec<u16>,
}

impl FlatRules {
    fn new(rules: &RuleTable, n_inputs: usize) -> Self {
        let n_rules = rules.len();
        let antecedents = (0..n_inputs)
            .map(|k| (0..n_rules).map(|r| rules.antecedent(r, k) as u16).collect())
            .collect();
        let consequents = (0..n_rules).map(|r| rules.consequent(r) as u16).collect();
        Self {
            n_rules,
            antecedents,
            consequents,
        }
    }
}

/// `N_p` controller pages sharing one rule table, ready for batched
/// evaluation.
#[derive(Debug, Clone)]
pub struct FisBatch {
    n_pages: usize,
    universes: Arc<Vec<(f64, f64)>>,
    set_counts: Arc<Vec<usize>>,
    n_out: usize,
    rules: Arc<FlatRules>,
    /// Per input: `N_p x N_ti,k x 4` corners.
    input_corners: Vec<Vec<f64>>,
    grid: Arc<Vec<f64>>,
    /// `N_p x N_to x N_dis` sampled output-set membership.
    out_grid_mu: Vec<f64>,
    out_midpoint: f64,
    exec: Exec,
}

impl FisBatch {
    /// Stack `specs` as pages. All pages must share rules, universes, set
    /// counts and discretization.
    pub fn from_specs(specs: &[FisSpec]) -> Result<Self, FisError> {
        let first = specs.first().ok_or(FisError::Dimension {
            what: "page list",
            expected: 1,
            got: 0,
        })?;
        for (p, s) in specs.iter().enumerate().skip(1) {
            let same = s.rules() == first.rules()
                && s.n_dis() == first.n_dis()
                && s.output().universe() == first.output().universe()
                && s.output().len() == first.output().len()
                && s.inputs().len() == first.inputs().len()
                && s.inputs().iter().zip(first.inputs()).all(|(x, y)| {
                    x.universe() == y.universe() && x.len() == y.len()
                });
            if !same {
                return Err(FisError::PageMismatch(p));
            }
        }

        let n_pages = specs.len();
        let n_inputs = first.n_inputs();
        let universes: Vec<(f64, f64)> = first.inputs().iter().map(|p| p.universe()).collect();
        let set_counts: Vec<usize> = first.inputs().iter().map(|p| p.len()).collect();
        let input_corners = (0..n_inputs)
            .map(|k| {
                specs
                    .iter()
                    .flat_map(|s| s.inputs()[k].sets().iter().flat_map(|t| t.corners()))
                    .collect()
            })
            .collect();

        let (lo, hi) = first.output().universe();
        let grid = discretize(lo, hi, first.n_dis());
        let n_out = first.output().len();
        let mut out_grid_mu = Vec::with_capacity(n_pages * n_out * grid.len());
        for s in specs {
            for set in s.output().sets() {
                out_grid_mu.extend(grid.iter().map(|&x| set.membership(x)));
            }
        }

        Ok(Self {
            n_pages,
            universes: Arc::new(universes),
            set_counts: Arc::new(set_counts),
            n_out,
            rules: Arc::new(FlatRules::new(first.rules(), n_inputs)),
            input_corners,
            grid: Arc::new(grid),
            out_grid_mu,
            out_midpoint: 0.5 * (lo + hi),
            exec: Exec::default(),
        })
    }

    /// Choose sequential or page-parallel evaluation.
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn n_pages(&self) -> usize {
        self.n_pages
    }

    pub fn n_inputs(&self) -> usize {
        self.universes.len()
    }

    pub fn n_dis(&self) -> usize {
        self.grid.len()
    }

    /// Drop pages whose `keep` flag is false, preserving order.
    pub fn retain(&mut self, keep: &[bool]) {
        assert_eq!(keep.len(), self.n_pages, "retain mask length");
        fn compact(v: &mut Vec<f64>, width: usize, keep: &[bool]) {
            let mut w = 0;
            for (p, &k) in keep.iter().enumerate() {
                if k {
                    if w != p {
                        v.copy_within(p * width..(p + 1) * width, w * width);
                    }
                    w += 1;
                }
            }
            v.truncate(w * width);
        }
        for (k, corners) in self.input_corners.iter_mut().enumerate() {
            compact(corners, self.set_counts[k] * 4, keep);
        }
        compact(&mut self.out_grid_mu, self.n_out * self.grid.len(), keep);
        self.n_pages = keep.iter().filter(|&&k| k).count();
    }

    /// Full fuzzify, infer, defuzzify pass over `x` (`N_p x N_inp`
    /// row-major).
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, FisError> {
        let u = fuzzify_batch(x, self)?;
        let act = infer_batch(&u, self)?;
        defuzzify_batch(&act, self)
    }
}

/// Membership of every input against every page's sets. Inputs outside a
/// universe are clamped to it first.
pub fn fuzzify_batch(x: &[f64], batch: &FisBatch) -> Result<Vec<MembershipBatch>, FisError> {
    let n_inp = batch.n_inputs();
    let n_pages = batch.n_pages;
    if x.len() != n_pages * n_inp {
        return Err(FisError::Dimension {
            what: "input matrix",
            expected: n_pages * n_inp,
            got: x.len(),
        });
    }
    let out = (0..n_inp)
        .map(|k| {
            let n_sets = batch.set_counts[k];
            let (lo, hi) = batch.universes[k];
            let corners = &batch.input_corners[k];
            let mut values = vec![0.0; n_pages * n_sets];
            batch.exec.for_each_chunk(&mut values, n_sets, |p, row| {
                let xk = x[p * n_inp + k].clamp(lo, hi);
                let c = &corners[p * n_sets * 4..(p + 1) * n_sets * 4];
                for (j, mu) in row.iter_mut().enumerate() {
                    *mu = trapezoid(xk, c[4 * j], c[4 * j + 1], c[4 * j + 2], c[4 * j + 3]);
                }
            });
            MembershipBatch {
                n_pages,
                n_sets,
                values,
            }
        })
        .collect();
    Ok(out)
}

/// Min-AND over each rule's antecedents, max-OR across rules per output set.
pub fn infer_batch(u: &[MembershipBatch], batch: &FisBatch) -> Result<Activations, FisError> {
    if u.len() != batch.n_inputs() {
        return Err(FisError::Dimension {
            what: "membership list",
            expected: batch.n_inputs(),
            got: u.len(),
        });
    }
    for (k, m) in u.iter().enumerate() {
        if m.n_pages != batch.n_pages || m.n_sets != batch.set_counts[k] {
            return Err(FisError::Dimension {
                what: "membership block",
                expected: batch.n_pages * batch.set_counts[k],
                got: m.values.len(),
            });
        }
    }
    let rules = &batch.rules;
    let n_out = batch.n_out;
    let mut values = vec![0.0f64; batch.n_pages * n_out];
    batch.exec.for_each_chunk(&mut values, n_out, |p, act| {
        for r in 0..rules.n_rules {
            let mut strength = 1.0f64;
            for (k, m) in u.iter().enumerate() {
                let mu = m.values[p * m.n_sets + rules.antecedents[k][r] as usize];
                strength = strength.min(mu);
            }
            let o = rules.consequents[r] as usize;
            act[o] = act[o].max(strength);
        }
    });
    Ok(Activations {
        n_pages: batch.n_pages,
        n_sets: n_out,
        values,
    })
}

/// Discrete centroid of the clipped-and-merged output sets. A page with no
/// active output set yields the midpoint of the output universe.
pub fn defuzzify_batch(act: &Activations, batch: &FisBatch) -> Result<Vec<f64>, FisError> {
    if act.n_pages != batch.n_pages || act.n_sets != batch.n_out {
        return Err(FisError::Dimension {
            what: "activation matrix",
            expected: batch.n_pages * batch.n_out,
            got: act.values.len(),
        });
    }
    let grid = &batch.grid;
    let n_dis = grid.len();
    let n_out = batch.n_out;
    let (lo, hi) = (grid[0], grid[n_dis - 1]);
    let mut y = vec![0.0; batch.n_pages];
    batch.exec.for_each_chunk(&mut y, 1, |p, slot| {
        let a = act.page(p);
        let mu_grid = &batch.out_grid_mu[p * n_out * n_dis..(p + 1) * n_out * n_dis];
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &x) in grid.iter().enumerate() {
            let mut mu = 0.0f64;
            for (j, &aj) in a.iter().enumerate() {
                mu = mu.max(mu_grid[j * n_dis + i].min(aj));
            }
            num += x * mu;
            den += mu;
        }
        slot[0] = if den > 0.0 {
            (num / den).clamp(lo, hi)
        } else {
            batch.out_midpoint
        };
    });
    Ok(y)
}

/// Evaluate `N_p` pages on `N_p` input rows.
pub fn evaluate_batch(x: &[f64], pages: &[FisSpec]) -> Result<Vec<f64>, FisError> {
    let batch = FisBatch::from_specs(pages)?;
    batch.evaluate(x)
}
