//! `{"scenario": {"n", "d", "dimB"}, "elements": {"a|x": <matrix>}}` envelope
//! shared by assemblages, functionals and measurement sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::qmat::{MatrixJson, Operator};

use super::{Assemblage, MeasurementSet, Result, Scenario, SteeringError, SteeringFunctional};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub scenario: ScenarioJson,
    pub elements: BTreeMap<String, MatrixJson>,
}

impl FamilyJson {
    fn encode(scenario: ScenarioJson, elements: &[Vec<Operator>]) -> Self {
        let mut map = BTreeMap::new();
        for (x, slice) in elements.iter().enumerate() {
            for (a, op) in slice.iter().enumerate() {
                map.insert(format!("{a}|{x}"), MatrixJson::from(op.clone()));
            }
        }
        Self {
            scenario,
            elements: map,
        }
    }

    /// Decodes the `elements` map into `[x][a]` order, requiring every key
    /// of the scenario exactly once.
    pub fn decode(&self) -> Result<(Scenario, Vec<Vec<Operator>>)> {
        let ScenarioJson { n, d, dim_b } = self.scenario;
        let scenario = Scenario::new(n, d, dim_b)?;
        let mut slots: Vec<Vec<Option<Operator>>> = vec![vec![None; d]; n];
        for (key, raw) in &self.elements {
            let (a, x) = parse_key(key)?;
            if a >= d || x >= n {
                return Err(SteeringError::ScenarioMismatch(format!("key {key} outside scenario")));
            }
            slots[x][a] = Some(Operator::try_from(raw.clone())?);
        }
        let elements = slots
            .into_iter()
            .enumerate()
            .map(|(x, slice)| {
                slice
                    .into_iter()
                    .enumerate()
                    .map(|(a, op)| {
                        op.ok_or_else(|| SteeringError::ScenarioMismatch(format!("missing key {a}|{x}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((scenario, elements))
    }
}

fn parse_key(key: &str) -> Result<(usize, usize)> {
    let bad = || SteeringError::ScenarioMismatch(format!("malformed element key {key:?}"));
    let (a, x) = key.split_once('|').ok_or_else(bad)?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(a) || !digits(x) {
        return Err(bad());
    }
    Ok((a.parse().map_err(|_| bad())?, x.parse().map_err(|_| bad())?))
}

fn scenario_json(s: &Scenario) -> ScenarioJson {
    ScenarioJson {
        n: s.n_inputs,
        d: s.n_outcomes,
        dim_b: s.dim_b,
    }
}

impl From<&Assemblage> for FamilyJson {
    fn from(value: &Assemblage) -> Self {
        Self::encode(scenario_json(value.scenario()), value.elements())
    }
}

impl From<&SteeringFunctional> for FamilyJson {
    fn from(value: &SteeringFunctional) -> Self {
        Self::encode(scenario_json(value.scenario()), value.elements())
    }
}

impl From<&MeasurementSet> for FamilyJson {
    fn from(value: &MeasurementSet) -> Self {
        let mut scenario = scenario_json(value.scenario());
        scenario.dim_b = value.dim();
        Self::encode(scenario, value.elements())
    }
}

impl TryFrom<&FamilyJson> for Assemblage {
    type Error = SteeringError;
    fn try_from(value: &FamilyJson) -> Result<Self> {
        let (scenario, elements) = value.decode()?;
        Assemblage::new(scenario, elements)
    }
}

impl TryFrom<&FamilyJson> for SteeringFunctional {
    type Error = SteeringError;
    fn try_from(value: &FamilyJson) -> Result<Self> {
        let (scenario, elements) = value.decode()?;
        SteeringFunctional::new(scenario, elements)
    }
}

impl TryFrom<&FamilyJson> for MeasurementSet {
    type Error = SteeringError;
    fn try_from(value: &FamilyJson) -> Result<Self> {
        let (scenario, elements) = value.decode()?;
        MeasurementSet::new(scenario, elements)
    }
}
