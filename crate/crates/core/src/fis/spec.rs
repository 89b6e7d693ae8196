use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::set::VariablePartition;
use super::FisError;

/// Default number of output discretization points.
pub const DEFAULT_N_DIS: usize = 101;

/// Mamdani rule matrix: each row holds one 1-based linguistic index per
/// input followed by the index of the single output set it fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct RuleTable {
    rows: Vec<Vec<usize>>,
}

impl TryFrom<Vec<Vec<usize>>> for RuleTable {
    type Error = FisError;

    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self, Self::Error> {
        RuleTable::new(rows)
    }
}

impl From<RuleTable> for Vec<Vec<usize>> {
    fn from(t: RuleTable) -> Self {
        t.rows
    }
}

impl RuleTable {
    /// Shape checks only; index ranges are checked against partitions by
    /// [`FisSpec::new`].
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self, FisError> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if width < 2 {
            return Err(FisError::InvalidRules(
                "need at least one input and one output column".into(),
            ));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != width) {
            return Err(FisError::InvalidRules(format!(
                "rule {} has {} columns, expected {width}",
                r + 1,
                rows[r].len()
            )));
        }
        let mut seen = HashSet::new();
        for (r, row) in rows.iter().enumerate() {
            if !seen.insert(&row[..width - 1]) {
                return Err(FisError::InvalidRules(format!(
                    "rule {} repeats an earlier antecedent",
                    r + 1
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// Zero-based antecedent index of `rule` for `input`.
    #[inline]
    pub(crate) fn antecedent(&self, rule: usize, input: usize) -> usize {
        self.rows[rule][input] - 1
    }

    /// Zero-based consequent index of `rule`.
    #[inline]
    pub(crate) fn consequent(&self, rule: usize) -> usize {
        self.rows[rule][self.rows[rule].len() - 1] - 1
    }
}

#[derive(Deserialize)]
struct RawSpec {
    inputs: Vec<VariablePartition>,
    output: VariablePartition,
    rules: RuleTable,
    #[serde(default = "default_n_dis")]
    n_dis: usize,
}

fn default_n_dis() -> usize {
    DEFAULT_N_DIS
}

/// Complete single-output Mamdani controller description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct FisSpec {
    inputs: Vec<VariablePartition>,
    output: VariablePartition,
    rules: RuleTable,
    n_dis: usize,
}

impl TryFrom<RawSpec> for FisSpec {
    type Error = FisError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        FisSpec::new(raw.inputs, raw.output, raw.rules, raw.n_dis)
    }
}

impl FisSpec {
    pub fn new(
        inputs: Vec<VariablePartition>,
        output: VariablePartition,
        rules: RuleTable,
        n_dis: usize,
    ) -> Result<Self, FisError> {
        if n_dis < 2 {
            return Err(FisError::Discretization(n_dis));
        }
        if rules.n_inputs() != inputs.len() {
            return Err(FisError::InvalidRules(format!(
                "rules reference {} inputs, spec has {}",
                rules.n_inputs(),
                inputs.len()
            )));
        }
        for (r, row) in rules.rows().iter().enumerate() {
            for (k, &idx) in row.iter().enumerate() {
                let n_sets = inputs.get(k).map_or(output.len(), VariablePartition::len);
                if idx == 0 || idx > n_sets {
                    return Err(FisError::RuleIndex {
                        rule: r + 1,
                        column: k + 1,
                        index: idx,
                        n_sets,
                    });
                }
            }
        }
        Ok(Self {
            inputs,
            output,
            rules,
            n_dis,
        })
    }

    /// The three-input HESS controller with evenly spaced membership
    /// functions: `soc` and `soe` on `[0, 1]` with {S, M, B}, normalized
    /// demand power on `[-1, 1]` with {NB, NM, NS, PS, PM, PB}, and the
    /// normalized supercapacitor power request on `[-1, 1]` with the same six
    /// labels.
    pub fn hess_template() -> Self {
        let inputs = vec![
            VariablePartition::uniform("soc", 0.0, 1.0, 3).expect("valid"),
            VariablePartition::uniform("soe", 0.0, 1.0, 3).expect("valid"),
            VariablePartition::uniform("p_dem", -1.0, 1.0, 6).expect("valid"),
        ];
        let output = VariablePartition::uniform("p_sc", -1.0, 1.0, 6).expect("valid");
        Self::new(inputs, output, hess_rules(), DEFAULT_N_DIS).expect("template is consistent")
    }

    pub fn inputs(&self) -> &[VariablePartition] {
        &self.inputs
    }

    pub fn output(&self) -> &VariablePartition {
        &self.output
    }

    pub fn rules(&self) -> &RuleTable {
        &self.rules
    }

    pub fn n_dis(&self) -> usize {
        self.n_dis
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    /// Same controller with a different output discretization.
    pub fn with_n_dis(&self, n_dis: usize) -> Result<Self, FisError> {
        Self::new(
            self.inputs.clone(),
            self.output.clone(),
            self.rules.clone(),
            n_dis,
        )
    }

    /// Same structure with replaced partitions; used by genome decoding.
    pub(crate) fn with_partitions(
        &self,
        inputs: Vec<VariablePartition>,
        output: VariablePartition,
    ) -> Result<Self, FisError> {
        Self::new(inputs, output, self.rules.clone(), self.n_dis)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, FisError> {
        toml::from_str(s).map_err(|e| FisError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, FisError> {
        toml::to_string(self).map_err(|e| FisError::Parse(e.to_string()))
    }
}

/// Output-space sample points `x_o`, shared by the batch and scalar engines.
pub(crate) fn discretize(lo: f64, hi: f64, n_dis: usize) -> Vec<f64> {
    let step = (hi - lo) / (n_dis - 1) as f64;
    (0..n_dis)
        .map(|i| if i == n_dis - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

/// Full 3 x 3 x 6 rule grid. The supercapacitor follows the sign of the
/// demand so it buffers traction peaks and takes regenerative power first;
/// its share shrinks as it empties (traction) or fills (braking).
fn hess_rules() -> RuleTable {
    const S: usize = 1;
    const M: usize = 2;
    const B: usize = 3;
    let mut rows = Vec::with_capacity(54);
    for soc in [S, M, B] {
        for soe in [S, M, B] {
            for p in 1..=6usize {
                let out = if p >= 4 {
                    match soe {
                        B => p,
                        M if soc == S => p,
                        M => (p - 1).max(4),
                        _ if p == 4 && soc == B => 3,
                        _ => 4,
                    }
                } else {
                    match soe {
                        B => (p + 1).min(3),
                        _ => p,
                    }
                };
                rows.push(vec![soc, soe, p, out]);
            }
        }
    }
    RuleTable::new(rows).expect("rule grid has unique antecedents")
}
