use std::path::Path;

use crate::fis::{MfGenome, GENOME_LEN};
use crate::sim::HessDesign;

use super::{GenerationStats, Individual, MooError};

fn io_err(path: &Path, e: impl std::fmt::Display) -> MooError {
    MooError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = ["gen", "n_sc", "j_laps", "j_lifebat"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=GENOME_LEN).map(|k| format!("g{k}")));
    h
}

fn write_rows<'a>(
    path: &Path,
    rows: impl Iterator<Item = (usize, &'a Individual)>,
) -> Result<(), MooError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header()).map_err(|e| io_err(path, e))?;
    for (gen, ind) in rows {
        let mut rec = vec![
            gen.to_string(),
            ind.candidate.n_sc.to_string(),
            ind.objectives[0].to_string(),
            ind.objectives[1].to_string(),
        ];
        rec.extend(ind.candidate.genes.iter().map(|g| g.to_string()));
        w.write_record(&rec).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Front members, each tagged with generation `gen`, sorted by `n_sc` then
/// laps for stable output.
pub fn write_front(path: &Path, front: &[Individual], gen: usize) -> Result<(), MooError> {
    let mut sorted: Vec<&Individual> = front.iter().collect();
    sorted.sort_by(|a, b| {
        a.candidate
            .n_sc
            .cmp(&b.candidate.n_sc)
            .then(a.objectives[0].total_cmp(&b.objectives[0]))
    });
    write_rows(path, sorted.into_iter().map(|i| (gen, i)))
}

/// Every evaluation, tagged with the generation that produced it.
pub fn write_archive(path: &Path, archive: &[Individual]) -> Result<(), MooError> {
    write_rows(path, archive.iter().map(|i| (i.generation, i)))
}

pub fn write_history(path: &Path, history: &[GenerationStats]) -> Result<(), MooError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for s in history {
        w.serialize(s).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// One row of a front or archive file.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub gen: usize,
    pub design: HessDesign,
    pub objectives: [f64; 2],
}

pub fn read_front(path: &Path) -> Result<Vec<FrontRow>, MooError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let h = r.headers().map_err(|e| io_err(path, e))?;
    if h.iter().collect::<Vec<_>>() != header() {
        return Err(io_err(path, "header must be gen,n_sc,j_laps,j_lifebat,g1..g28"));
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| io_err(path, format!("row {row}: {e}")))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| io_err(path, format!("row {row}: bad value `{}` in column {}", field(i), i + 1));
        let gen = field(0).parse().map_err(|_| bad(0))?;
        let n_sc = field(1).parse().map_err(|_| bad(1))?;
        let j_laps = field(2).parse().map_err(|_| bad(2))?;
        let j_lifebat = field(3).parse().map_err(|_| bad(3))?;
        let genes = (4..4 + GENOME_LEN)
            .map(|i| field(i).parse::<f64>().map_err(|_| bad(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let genome = MfGenome::new(genes).map_err(|e| io_err(path, format!("row {row}: {e}")))?;
        let design = HessDesign::new(n_sc, genome).map_err(|e| io_err(path, format!("row {row}: {e}")))?;
        rows.push(FrontRow {
            gen,
            design,
            objectives: [j_laps, j_lifebat],
        });
    }
    Ok(rows)
}
