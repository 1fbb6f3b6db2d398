//! On-disk setting format: four observables, four designated outcomes, and
//! an optional state, with complex entries as `[re, im]` pairs.

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use thardy_core::hardy::MeasurementSetting;
use thardy_core::qcore::{CMatrix, Observable, PureState};

type ComplexPair = [f64; 2];
type MatrixRows = Vec<Vec<ComplexPair>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SettingFile {
    pub dim: usize,
    pub observables: ObservableMatrices,
    pub outcomes: Outcomes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<ComplexPair>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableMatrices {
    pub a1: MatrixRows,
    pub a2: MatrixRows,
    pub b1: MatrixRows,
    pub b2: MatrixRows,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Outcomes {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl SettingFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let file: SettingFile = serde_json::from_str(text).context("malformed setting JSON")?;
        Ok(file)
    }

    /// Validates and converts into core types. Errors name the offending
    /// observable.
    pub fn to_setting(
        &self,
        cluster_tol: f64,
    ) -> anyhow::Result<(MeasurementSetting, Option<PureState>)> {
        let a1 = self.observable(&self.observables.a1, self.outcomes.a1, "A1")?;
        let a2 = self.observable(&self.observables.a2, self.outcomes.a2, "A2")?;
        let b1 = self.observable(&self.observables.b1, self.outcomes.b1, "B1")?;
        let b2 = self.observable(&self.observables.b2, self.outcomes.b2, "B2")?;
        let setting =
            MeasurementSetting::new(a1, a2, b1, b2, cluster_tol).context("setting rejected")?;
        let state = match &self.state {
            None => None,
            Some(pairs) => {
                if pairs.len() != self.dim {
                    bail!(
                        "state has {} amplitudes, expected {}",
                        pairs.len(),
                        self.dim
                    );
                }
                let amps: Vec<Complex64> = pairs
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                Some(PureState::new(amps).context("state rejected")?)
            }
        };
        Ok((setting, state))
    }

    fn observable(
        &self,
        rows: &MatrixRows,
        outcome: f64,
        name: &str,
    ) -> anyhow::Result<Observable> {
        if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
            bail!("observable {name} is not a {0}x{0} matrix", self.dim);
        }
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect();
        let matrix =
            CMatrix::from_rows(&complex).with_context(|| format!("observable {name} rejected"))?;
        Observable::new(matrix, outcome).with_context(|| format!("observable {name} rejected"))
    }

    /// Captures a setting (and optionally its state) for writing.
    pub fn from_setting(setting: &MeasurementSetting, state: Option<&PureState>) -> Self {
        let [a1, a2, b1, b2] = setting.observables();
        let dump = |obs: &Observable| -> MatrixRows {
            let m = obs.matrix();
            (0..m.dim())
                .map(|i| {
                    (0..m.dim())
                        .map(|j| {
                            let z = m.at(i, j);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect()
        };
        SettingFile {
            dim: setting.dim(),
            observables: ObservableMatrices {
                a1: dump(a1),
                a2: dump(a2),
                b1: dump(b1),
                b2: dump(b2),
            },
            outcomes: Outcomes {
                a1: a1.designated(),
                a2: a2.designated(),
                b1: b1.designated(),
                b2: b2.designated(),
            },
            state: state.map(|psi| psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::to_canonical_json;
    use thardy_core::spin::{spin1_optimal_alpha, spin1_setting};

    #[test]
    fn round_trip_is_lossless_and_canonical() {
        let s = spin1_setting(spin1_optimal_alpha()).unwrap();
        let file = SettingFile::from_setting(&s.setting, Some(&s.psi));
        let json = to_canonical_json(&file).unwrap();

        let parsed = SettingFile::parse(&json).unwrap();
        let reserialized = to_canonical_json(&parsed).unwrap();
        assert_eq!(json, reserialized, "canonical form must be a fixed point");

        let (setting, state) = parsed.to_setting(1e-8).unwrap();
        assert_eq!(setting.dim(), 3);
        let psi = state.unwrap();
        for (a, b) in psi.amplitudes().iter().zip(s.psi.amplitudes()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        for (left, right) in setting.observables().iter().zip(s.setting.observables()) {
            assert_eq!(left.matrix(), right.matrix());
        }
    }

    #[test]
    fn non_hermitian_observable_is_named() {
        let mut s = SettingFile::from_setting(&spin1_setting(1.0).unwrap().setting, None);
        s.observables.b1[0][1] = [9.0, 0.0]; // break hermiticity of B1
        let err = s.to_setting(1e-8).unwrap_err();
        assert!(format!("{err:#}").contains("B1"), "{err:#}");
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let mut s = SettingFile::from_setting(&spin1_setting(1.0).unwrap().setting, None);
        s.observables.a2[2].pop();
        let err = s.to_setting(1e-8).unwrap_err();
        assert!(format!("{err:#}").contains("A2"));
    }
}
