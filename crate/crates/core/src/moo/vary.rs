use rand::Rng;

/// Decision vector: supercapacitor bank count plus membership genes.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub n_sc: usize,
    pub genes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationParams {
    pub crossover_rate: f64,
    pub eta_c: f64,
    /// Per-gene mutation probability, the bank count included.
    pub mutation_rate: f64,
    pub eta_m: f64,
    pub n_sc_min: usize,
    pub n_sc_max: usize,
}

const EPS: f64 = 1e-14;

fn sbx_spread(beta: f64, u: f64, eta: f64) -> f64 {
    let alpha = 2.0 - beta.powf(-(eta + 1.0));
    if u <= 1.0 / alpha {
        (u * alpha).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
    }
}

/// Bounded simulated binary crossover of one gene pair on `[0, 1]`.
fn sbx_pair<R: Rng + ?Sized>(x1: f64, x2: f64, eta: f64, rng: &mut R) -> (f64, f64) {
    if (x1 - x2).abs() <= EPS {
        return (x1, x2);
    }
    let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let u: f64 = rng.gen();
    let span = y2 - y1;
    let bq1 = sbx_spread(1.0 + 2.0 * y1 / span, u, eta);
    let bq2 = sbx_spread(1.0 + 2.0 * (1.0 - y2) / span, u, eta);
    let c1 = (0.5 * ((y1 + y2) - bq1 * span)).clamp(0.0, 1.0);
    let c2 = (0.5 * ((y1 + y2) + bq2 * span)).clamp(0.0, 1.0);
    if rng.gen_bool(0.5) {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

/// Bounded polynomial mutation of one gene on `[0, 1]`.
fn polynomial_mutation<R: Rng + ?Sized>(y: f64, eta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let pow = 1.0 / (eta + 1.0);
    let dq = if u <= 0.5 {
        let xy = 1.0 - y;
        (2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0)).powf(pow) - 1.0
    } else {
        let xy = y;
        1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0)).powf(pow)
    };
    (y + dq).clamp(0.0, 1.0)
}

/// Bounded random walk of the bank count.
fn walk_n_sc<R: Rng + ?Sized>(n: usize, vp: &VariationParams, rng: &mut R) -> usize {
    let reach = ((vp.n_sc_max - vp.n_sc_min) / 20).max(1) as i64;
    let mut step = rng.gen_range(1..=reach);
    if rng.gen_bool(0.5) {
        step = -step;
    }
    (n as i64 + step).clamp(vp.n_sc_min as i64, vp.n_sc_max as i64) as usize
}

/// Two children from two parents: crossover with probability
/// `crossover_rate` (each gene pair exchanged with probability 1/2, the
/// bank counts swapped with probability 1/2), then per-gene mutation.
pub fn vary_pair<R: Rng + ?Sized>(
    p1: &Candidate,
    p2: &Candidate,
    vp: &VariationParams,
    rng: &mut R,
) -> (Candidate, Candidate) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    if vp.crossover_rate > 0.0 && rng.gen_bool(vp.crossover_rate.min(1.0)) {
        for (g1, g2) in c1.genes.iter_mut().zip(c2.genes.iter_mut()) {
            if rng.gen_bool(0.5) {
                let (a, b) = sbx_pair(*g1, *g2, vp.eta_c, rng);
                *g1 = a;
                *g2 = b;
            }
        }
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut c1.n_sc, &mut c2.n_sc);
        }
    }
    if vp.mutation_rate > 0.0 {
        let rate = vp.mutation_rate.min(1.0);
        for c in [&mut c1, &mut c2] {
            for g in c.genes.iter_mut() {
                if rng.gen_bool(rate) {
                    *g = polynomial_mutation(*g, vp.eta_m, rng);
                }
            }
            if rng.gen_bool(rate) {
                c.n_sc = walk_n_sc(c.n_sc, vp, rng);
            }
        }
    }
    (c1, c2)
}
