//! Loading, cleaning, resampling, scaling and windowing of multivariate series.

mod clean;
mod csvio;
mod scaler;
mod schema;
mod series;
mod windows;

pub use clean::{drop_missing, native_interval, parse_resolution, resample};
pub use csvio::{load_csv, read_csv, save_csv, write_csv, MISSING_SENTINELS};
pub use scaler::MinMaxScaler;
pub use schema::{DatasetSchema, ISO_FORMAT, UNIX_SECONDS};
pub use series::MultivariateSeries;
pub use windows::{make_windows, SplitSpec, WindowLayout, WindowRange, MIN_WINDOW_ROWS};
