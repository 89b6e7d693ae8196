use super::set::VariablePartition;
use super::spec::FisSpec;
use super::FisError;

/// Number of membership-function genes of the HESS controller layout
/// (3 + 3 + 6 + 6 sets, `2(n - 1)` overlap corners per variable).
pub const GENOME_LEN: usize = 28;

/// Membership-function parameters in normalized `[0, 1]` universe units.
///
/// Genes are grouped per variable (inputs in order, then the output); each
/// group lists the interior overlap corners of that variable's partition.
#[derive(Debug, Clone, PartialEq)]
pub struct MfGenome(Vec<f64>);

impl MfGenome {
    pub fn new(genes: Vec<f64>) -> Result<Self, FisError> {
        if genes.len() != GENOME_LEN {
            return Err(FisError::GenomeLength {
                expected: GENOME_LEN,
                got: genes.len(),
            });
        }
        Ok(Self(genes))
    }

    /// Evenly spaced partitions for every variable of the HESS layout.
    pub fn uniform() -> Self {
        let mut genes = Vec::with_capacity(GENOME_LEN);
        for n_sets in [3usize, 3, 6, 6] {
            genes.extend((1..=2 * (n_sets - 1)).map(|k| k as f64 / (2 * n_sets - 1) as f64));
        }
        Self(genes)
    }

    /// Hand-designed starting controller. This is the uniform layout.
    pub fn initial() -> Self {
        Self::uniform()
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.0
    }
}

/// Number of genes `decode_genome` expects for `template`.
pub fn genome_len_for(template: &FisSpec) -> usize {
    template
        .inputs()
        .iter()
        .chain(std::iter::once(template.output()))
        .map(|p| 2 * (p.len() - 1))
        .sum()
}

/// Decode `genome` onto the structure of `template`, keeping its rules,
/// universes and discretization.
///
/// Each variable's corner genes are sorted before use, so any genome in the
/// unit box decodes to a valid partition.
pub fn decode_genome(genome: &MfGenome, template: &FisSpec) -> Result<FisSpec, FisError> {
    decode_genes(genome.genes(), template)
}

pub(crate) fn decode_genes(genes: &[f64], template: &FisSpec) -> Result<FisSpec, FisError> {
    let expected = genome_len_for(template);
    if genes.len() != expected {
        return Err(FisError::GenomeLength {
            expected,
            got: genes.len(),
        });
    }
    if let Some(i) = genes.iter().position(|g| !(0.0..=1.0).contains(g)) {
        return Err(FisError::GeneOutOfRange {
            index: i,
            value: genes[i],
        });
    }

    let mut offset = 0;
    let mut rebuild = |p: &VariablePartition| {
        let n = 2 * (p.len() - 1);
        let mut corners = genes[offset..offset + n].to_vec();
        offset += n;
        corners.sort_by(f64::total_cmp);
        let (lo, hi) = p.universe();
        VariablePartition::from_unit_corners(p.name(), lo, hi, p.len(), &corners)
    };
    let inputs = template
        .inputs()
        .iter()
        .map(&mut rebuild)
        .collect::<Result<Vec<_>, _>>()?;
    let output = rebuild(template.output())?;
    template.with_partitions(inputs, output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn template_layout_has_28_genes() {
        assert_eq!(genome_len_for(&FisSpec::hess_template()), GENOME_LEN);
    }

    #[test]
    fn uniform_genome_reproduces_template() {
        let t = FisSpec::hess_template();
        let decoded = decode_genome(&MfGenome::uniform(), &t).unwrap();
        assert_eq!(decoded, t);
    }

    #[test]
    fn swapped_corners_are_repaired_by_sorting() {
        let t = FisSpec::hess_template();
        let sorted = MfGenome::uniform();
        let mut genes = sorted.genes().to_vec();
        genes.swap(9, 10);
        let swapped = MfGenome::new(genes).unwrap();
        assert_eq!(
            decode_genome(&swapped, &t).unwrap(),
            decode_genome(&sorted, &t).unwrap()
        );
    }

    #[test]
    fn wrong_lengths_rejected() {
        for n in [27, 29] {
            assert!(matches!(
                MfGenome::new(vec![0.5; n]),
                Err(FisError::GenomeLength { expected: 28, got }) if got == n
            ));
        }
    }

    #[test]
    fn gene_outside_unit_range_is_a_domain_error() {
        let mut genes = MfGenome::uniform().into_genes();
        genes[3] = 1.2;
        let g = MfGenome::new(genes).unwrap();
        assert!(matches!(
            decode_genome(&g, &FisSpec::hess_template()),
            Err(FisError::GeneOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn random_genomes_decode_to_valid_partitions() {
        let t = FisSpec::hess_template();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let genes: Vec<f64> = (0..GENOME_LEN).map(|_| rng.gen::<f64>()).collect();
            let spec = decode_genome(&MfGenome::new(genes).unwrap(), &t).unwrap();
            for p in spec.inputs().iter().chain([spec.output()]) {
                let (lo, hi) = p.universe();
                let mut prev_b = f64::NEG_INFINITY;
                for s in p.sets() {
                    let [a, b, c, d] = s.corners();
                    assert!(lo <= a && a <= b && b <= c && c <= d && d <= hi);
                    assert!(b >= prev_b);
                    prev_b = b;
                }
                // every sampled point is covered
                for i in 0..=200 {
                    let x = lo + (hi - lo) * i as f64 / 200.0;
                    assert!(p.sets().iter().any(|s| s.membership(x) > 0.0));
                }
            }
        }
    }
}
