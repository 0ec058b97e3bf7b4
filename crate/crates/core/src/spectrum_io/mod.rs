//! Spectrum and time-series file formats, probe-frequency selection and
//! spectrum probing.

mod csv_io;
mod probe;
mod select;

pub use csv_io::{
    parse_eis_csv, parse_time_series_csv, read_eis_csv, read_time_series_csv, write_eis_csv,
    write_time_series_csv, EisLayout, POLAR_HEADER, RECT_HEADER, SERIES_HEADER, TIME_STEP_TOLERANCE,
};
pub use probe::{probe_at, probe_spectrum};
pub use select::{
    inductive_tail_start, select_frequencies, semicircle_apex, HighRule, MidRule, Selection,
    SelectionPolicy, F_LOW_FLOOR_HZ, F_LOW_TARGET_HZ, MIN_SPAN_DECADES, ZERO_SLOPE_FRACTION,
};
