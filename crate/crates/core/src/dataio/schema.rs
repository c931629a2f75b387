use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestamp format understood by the loaders: a chrono `strftime` pattern,
/// or `"unix"` for integer/decimal seconds since the epoch.
pub const UNIX_SECONDS: &str = "unix";

/// ISO-8601 layout used when writing series back to disk.
pub const ISO_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Describes how to read one dataset layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// One or more columns joined by a single space before parsing.
    pub timestamp_columns: Vec<String>,
    pub timestamp_format: String,
    /// Variables to keep, in order. `None` keeps every non-timestamp column.
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    /// Endogenous variable. `None` selects the first variable.
    #[serde(default)]
    pub target: Option<String>,
    /// Columns whose unparseable cells become missing instead of failing.
    #[serde(default)]
    pub nullable: Vec<String>,
}

fn default_delimiter() -> char {
    ','
}

const AEC_VARIABLES: [&str; 25] = [
    "Appliances",
    "lights",
    "RH_1",
    "T2",
    "RH_2",
    "T3",
    "RH_3",
    "T4",
    "RH_4",
    "T5",
    "RH_5",
    "T6",
    "RH_6",
    "T7",
    "RH_7",
    "T8",
    "RH_8",
    "T9",
    "RH_9",
    "T_out",
    "Press_mm_hg",
    "RH_out",
    "Windspeed",
    "Visibility",
    "Tdewpoint",
];

const HPC_VARIABLES: [&str; 7] = [
    "Global_active_power",
    "Global_reactive_power",
    "Voltage",
    "Global_intensity",
    "Sub_metering_1",
    "Sub_metering_2",
    "Sub_metering_3",
];

const SHWI_VARIABLES: [&str; 26] = [
    "use [kW]",
    "gen [kW]",
    "Dishwasher [kW]",
    "Furnace 1 [kW]",
    "Furnace 2 [kW]",
    "Home office [kW]",
    "Fridge [kW]",
    "Wine cellar [kW]",
    "Garage door [kW]",
    "Kitchen 12 [kW]",
    "Kitchen 14 [kW]",
    "Kitchen 38 [kW]",
    "Barn [kW]",
    "Well [kW]",
    "Microwave [kW]",
    "Living room [kW]",
    "Solar [kW]",
    "temperature",
    "humidity",
    "visibility",
    "apparentTemperature",
    "pressure",
    "windSpeed",
    "windBearing",
    "dewPoint",
    "precipProbability",
];

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl DatasetSchema {
    /// UCI appliances energy data (`energydata_complete.csv`), 10-minute rows.
    pub fn aec() -> Self {
        Self {
            name: "aec".into(),
            delimiter: ',',
            timestamp_columns: vec!["date".into()],
            timestamp_format: "%Y-%m-%d %H:%M:%S".into(),
            variables: Some(owned(&AEC_VARIABLES)),
            target: Some("Appliances".into()),
            nullable: Vec::new(),
        }
    }

    /// UCI individual household power consumption
    /// (`household_power_consumption.txt`), 1-minute rows, `;` separated,
    /// `?` marks missing readings.
    pub fn hpc() -> Self {
        Self {
            name: "hpc".into(),
            delimiter: ';',
            timestamp_columns: vec!["Date".into(), "Time".into()],
            timestamp_format: "%d/%m/%Y %H:%M:%S".into(),
            variables: Some(owned(&HPC_VARIABLES)),
            target: Some("Global_active_power".into()),
            nullable: owned(&HPC_VARIABLES),
        }
    }

    /// Kaggle smart home with weather information (`HomeC.csv`).
    pub fn shwi() -> Self {
        Self {
            name: "shwi".into(),
            delimiter: ',',
            timestamp_columns: vec!["time".into()],
            timestamp_format: UNIX_SECONDS.into(),
            variables: Some(owned(&SHWI_VARIABLES)),
            target: Some("use [kW]".into()),
            nullable: owned(&SHWI_VARIABLES),
        }
    }

    /// Layout written by [`save_csv`](super::save_csv): an ISO `timestamp`
    /// column followed by numeric variables.
    pub fn cleaned(target: Option<String>) -> Self {
        Self {
            name: "cleaned".into(),
            delimiter: ',',
            timestamp_columns: vec!["timestamp".into()],
            timestamp_format: ISO_FORMAT.into(),
            variables: None,
            target,
            nullable: Vec::new(),
        }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "aec" => Ok(Self::aec()),
            "hpc" => Ok(Self::hpc()),
            "shwi" => Ok(Self::shwi()),
            "cleaned" => Ok(Self::cleaned(None)),
            other => Err(Error::Schema(format!(
                "unknown dataset schema `{other}` (expected aec, hpc, shwi or cleaned)"
            ))),
        }
    }
}
