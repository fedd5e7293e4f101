//! Fisher information, photon scattering, the single-photon limit and NOON advantage.

mod advantage;
mod curve;
mod efficiency;
mod fisher;
mod scattering;
mod sql;

pub use advantage::{
    advantage_on_channel, advantage_ratios, optimize_noon_phase, AdvantageOptions, AdvantageRatios, ChannelAdvantage,
    PairProbe,
};
pub use curve::{fisher_curve, FisherCurve, FisherCurvePoint};
pub use efficiency::EfficiencyModel;
pub use fisher::{
    fisher_from_derivatives, fisher_from_stencil, fisher_information, magnetic_uncertainty, stencil_fields,
    with_no_click, FisherPoint, DEFAULT_STEP, PROBABILITY_FLOOR,
};
pub use scattering::{scattering_mean, ScatteringOperator};
pub use sql::{sql_optimize, sql_optimize_probe, RestartRecord, SingleProbe, SqlObjective, SqlOptions, SqlResult};
