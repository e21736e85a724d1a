//! Nuclide decay records, the embedded α / cluster / fission tables and the
//! physical constants shared by the models.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EMBEDDED_CSV: &str = include_str!("../data/nuclides.csv");
const PRINTED_THEORY_CSV: &str = include_str!("../data/printed_theory.csv");

/// Exact CSV header of the dataset format.
pub const CSV_HEADER: [&str; 14] = [
    "element",
    "A",
    "Z",
    "A_cl",
    "Z_cl",
    "E_TKE_MeV",
    "E_TKE_err_MeV",
    "Q_MeV",
    "Q_err_MeV",
    "T_half_exp_yr",
    "T_half_err_lo_yr",
    "T_half_err_hi_yr",
    "role",
    "decay_class",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Fit,
    Validate,
    Predict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Alpha,
    Cluster,
    SpontaneousFission,
}

impl DecayClass {
    /// Classification implied by the emitted fragment.
    pub fn from_fragment(a_cl: u32, z_cl: u32) -> Self {
        if (a_cl, z_cl) == (4, 2) {
            DecayClass::Alpha
        } else if a_cl > 34 {
            DecayClass::SpontaneousFission
        } else {
            DecayClass::Cluster
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DecayClass::Alpha => "alpha",
            DecayClass::Cluster => "cluster",
            DecayClass::SpontaneousFission => "spontaneous_fission",
        }
    }
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Fit => "fit",
            Role::Validate => "validate",
            Role::Predict => "predict",
        }
    }
}

/// One decay channel of a parent nucleus.
///
/// Energies are in MeV, half-lives in years. `t_half_err_lo`/`t_half_err_hi`
/// hold the lower and upper experimental errors (equal for symmetric errors,
/// zero when none is tabulated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclideRecord {
    pub element: String,
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "Z")]
    pub z: u32,
    #[serde(rename = "A_cl")]
    pub a_cl: u32,
    #[serde(rename = "Z_cl")]
    pub z_cl: u32,
    #[serde(rename = "E_TKE_MeV")]
    pub e_tke: f64,
    #[serde(rename = "E_TKE_err_MeV")]
    pub e_tke_err: f64,
    #[serde(rename = "Q_MeV")]
    pub q_total: f64,
    #[serde(rename = "Q_err_MeV")]
    pub q_err: f64,
    #[serde(rename = "T_half_exp_yr")]
    pub t_half_exp: f64,
    #[serde(rename = "T_half_err_lo_yr")]
    pub t_half_err_lo: f64,
    #[serde(rename = "T_half_err_hi_yr")]
    pub t_half_err_hi: f64,
    pub role: Role,
    pub decay_class: DecayClass,
}

impl NuclideRecord {
    /// Bare α-decay record with no experimental errors, role `Fit`.
    pub fn alpha(element: &str, a: u32, z: u32, e_tke: f64, q_total: f64, t_half_exp: f64) -> Self {
        Self::channel(element, a, z, 4, 2, e_tke, q_total, t_half_exp)
    }

    /// Bare record for an arbitrary fragment, classified from (A_cl, Z_cl).
    #[allow(clippy::too_many_arguments)]
    pub fn channel(
        element: &str,
        a: u32,
        z: u32,
        a_cl: u32,
        z_cl: u32,
        e_tke: f64,
        q_total: f64,
        t_half_exp: f64,
    ) -> Self {
        NuclideRecord {
            element: element.to_string(),
            a,
            z,
            a_cl,
            z_cl,
            e_tke,
            e_tke_err: 0.0,
            q_total,
            q_err: 0.0,
            t_half_exp,
            t_half_err_lo: 0.0,
            t_half_err_hi: 0.0,
            role: Role::Fit,
            decay_class: DecayClass::from_fragment(a_cl, z_cl),
        }
    }

    /// lg of the measured half-life in years.
    pub fn lg_t_exp(&self) -> f64 {
        self.t_half_exp.log10()
    }

    /// Experimental error of lg T, symmetrized from the (lo, hi) pair.
    /// Zero when no error is tabulated.
    pub fn lg_t_sigma(&self) -> f64 {
        let mean_err = 0.5 * (self.t_half_err_lo + self.t_half_err_hi);
        mean_err / (self.t_half_exp * std::f64::consts::LN_10)
    }

    pub fn label(&self) -> String {
        let name = if self.element.is_empty() {
            format!("Z={}", self.z)
        } else {
            self.element.clone()
        };
        match self.decay_class {
            DecayClass::Alpha => format!("{name}-{} α", self.a),
            _ => format!("{name}-{} → A_cl={} Z_cl={}", self.a, self.a_cl, self.z_cl),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |rule: &str| {
            Err(Error::Validation {
                record: self.label(),
                rule: rule.to_string(),
            })
        };
        if self.z < 1 || self.a <= self.z {
            return fail("requires A > Z >= 1");
        }
        if self.a_cl < 4 || self.z_cl < 2 {
            return fail("requires A_cl >= 4 and Z_cl >= 2");
        }
        if self.a_cl >= self.a || self.z_cl >= self.z {
            return fail("requires A_cl < A and Z_cl < Z");
        }
        if !(self.e_tke > 0.0) || !self.e_tke.is_finite() {
            return fail("requires E_TKE > 0");
        }
        if !(self.q_total >= self.e_tke) {
            return fail("requires Q >= E_TKE");
        }
        if self.decay_class != DecayClass::from_fragment(self.a_cl, self.z_cl) {
            return fail("decay_class inconsistent with (A_cl, Z_cl)");
        }
        if self.role != Role::Predict && !(self.t_half_exp > 0.0) {
            return fail("requires T_half_exp > 0 for fit and validate rows");
        }
        if self.t_half_err_lo < 0.0 || self.t_half_err_hi < 0.0 {
            return fail("half-life errors must be non-negative");
        }
        Ok(())
    }
}

impl fmt::Display for NuclideRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Kinetic energy of the emitted fragment, Q·(A − A_cl)/A. Matches the
/// tabulated E_TKE for α and cluster emission only; fission rows list the
/// total fragment kinetic energy.
pub fn etke_from_q(record: &NuclideRecord) -> f64 {
    let a = f64::from(record.a);
    record.q_total * (a - f64::from(record.a_cl)) / a
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<NuclideRecord>,
    pub provenance: String,
}

impl Dataset {
    /// The compiled-in 100-row table (81 α, 10 cluster, 9 fission).
    pub fn embedded() -> Self {
        let mut ds = load_dataset(EMBEDDED_CSV.as_bytes()).expect("embedded dataset is valid");
        ds.provenance = "embedded".to_string();
        ds
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &NuclideRecord> {
        self.records.iter().filter(move |r| r.role == role)
    }

    pub fn fit_records(&self) -> Vec<&NuclideRecord> {
        self.with_role(Role::Fit).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.element.clone(),
                r.a.to_string(),
                r.z.to_string(),
                r.a_cl.to_string(),
                r.z_cl.to_string(),
                r.e_tke.to_string(),
                r.e_tke_err.to_string(),
                r.q_total.to_string(),
                r.q_err.to_string(),
                format!("{:e}", r.t_half_exp),
                format!("{:e}", r.t_half_err_lo),
                format!("{:e}", r.t_half_err_hi),
                r.role.as_str().to_string(),
                r.decay_class.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parses and validates a dataset in the CSV format of [`CSV_HEADER`].
pub fn load_dataset<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for row in reader.deserialize::<NuclideRecord>() {
        let record = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        record.validate()?;
        records.push(record);
    }
    Ok(Dataset {
        records,
        provenance: "csv".to_string(),
    })
}

/// The published model half-lives (years) for the embedded rows, in row order.
pub fn printed_theory_half_lives() -> Vec<f64> {
    PRINTED_THEORY_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let value = l.split(',').nth(1).expect("two columns");
            value.trim().parse().expect("numeric half-life")
        })
        .collect()
}

/// Physical constants in MeV–fm units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Coulomb constant e², MeV·fm.
    pub e_squared: f64,
    /// ħc, MeV·fm.
    pub hbar_c: f64,
    /// Atomic mass unit, MeV.
    pub amu: f64,
    pub seconds_per_year: f64,
    /// A/a, MeV.
    pub level_density_ratio: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            e_squared: 1.43996,
            hbar_c: 197.3269631,
            amu: 931.494,
            seconds_per_year: 3.1557e7,
            level_density_ratio: 8.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.e_squared,
            self.hbar_c,
            self.amu,
            self.seconds_per_year,
            self.level_density_ratio,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::Config("physical constants must be positive".into()));
        }
        if !(7.0..=9.0).contains(&self.level_density_ratio) {
            return Err(Error::Config(format!(
                "level density ratio A/a = {} MeV outside [7, 9]",
                self.level_density_ratio
            )));
        }
        Ok(())
    }
}
