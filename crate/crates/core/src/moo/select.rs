use rand::Rng;

use super::sort::{crowding_distance, non_dominated_sort};

/// Rank and crowding of every member of a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub fronts: Vec<Vec<usize>>,
    /// Zero-based front index per member.
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

pub fn rank_population(objs: &[[f64; 2]]) -> Ranking {
    let fronts = non_dominated_sort(objs);
    let mut rank = vec![0; objs.len()];
    let mut crowding = vec![0.0; objs.len()];
    for (r, front) in fronts.iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(objs, front)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    Ranking {
        fronts,
        rank,
        crowding,
    }
}

/// Members of `front` ordered by decreasing crowding distance, ties by index.
fn by_crowding(front: &[usize], crowding: &[f64]) -> Vec<usize> {
    let mut v = front.to_vec();
    v.sort_by(|&a, &b| crowding[b].total_cmp(&crowding[a]).then(a.cmp(&b)));
    v
}

/// Per-front admission quotas `n * (1 - r) r^(i-1) / (1 - r^k)` with
/// `r = 1 - elite_fraction`.
pub fn front_quotas(n: usize, n_fronts: usize, elite_fraction: f64) -> Vec<f64> {
    let r = (1.0 - elite_fraction).clamp(0.0, 1.0);
    if n_fronts == 0 {
        return Vec::new();
    }
    if r >= 1.0 {
        return vec![n as f64 / n_fronts as f64; n_fronts];
    }
    let norm = 1.0 - r.powi(n_fronts as i32);
    (0..n_fronts)
        .map(|i| n as f64 * (1.0 - r) * r.powi(i as i32) / norm)
        .collect()
}

/// Controlled-elitist survivor selection of `n` members from a ranked pool.
///
/// The first front is kept whole up to `n`. Later fronts are admitted up to
/// their geometric quota plus any unused quota of earlier fronts, each front
/// truncated by crowding distance. Places left over by rounding go to the
/// best remaining members in rank then crowding order. Returns pool indices
/// in admission order.
pub fn controlled_elitist_select(ranking: &Ranking, n: usize, elite_fraction: f64) -> Vec<usize> {
    let total: usize = ranking.fronts.iter().map(Vec::len).sum();
    let n = n.min(total);
    let quotas = front_quotas(n, ranking.fronts.len(), elite_fraction);
    let ordered: Vec<Vec<usize>> = ranking
        .fronts
        .iter()
        .map(|f| by_crowding(f, &ranking.crowding))
        .collect();

    let mut taken = vec![0usize; ordered.len()];
    let mut chosen = Vec::with_capacity(n);
    let mut carry = 0.0;
    for (i, front) in ordered.iter().enumerate() {
        let room = n - chosen.len();
        let allowed = if i == 0 {
            front.len()
        } else {
            // tolerate rounding in the accumulated quota
            (quotas[i] + carry + 1e-9).floor() as usize
        };
        let k = allowed.min(front.len()).min(room);
        chosen.extend_from_slice(&front[..k]);
        taken[i] = k;
        if i > 0 {
            carry += quotas[i] - k as f64;
        } else {
            carry = (quotas[0] - k as f64).max(0.0);
        }
    }
    for (i, front) in ordered.iter().enumerate() {
        let room = n - chosen.len();
        if room == 0 {
            break;
        }
        let k = (front.len() - taken[i]).min(room);
        chosen.extend_from_slice(&front[taken[i]..taken[i] + k]);
    }
    chosen
}

/// Binary tournament on (rank, crowding); exact ties go to a coin flip.
pub fn tournament<R: Rng + ?Sized>(ranking: &Ranking, candidates: &[usize], rng: &mut R) -> usize {
    let a = candidates[rng.gen_range(0..candidates.len())];
    let b = candidates[rng.gen_range(0..candidates.len())];
    let better = |x: usize, y: usize| {
        ranking.rank[x] < ranking.rank[y]
            || (ranking.rank[x] == ranking.rank[y] && ranking.crowding[x] > ranking.crowding[y])
    };
    if better(a, b) {
        a
    } else if better(b, a) {
        b
    } else if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}
