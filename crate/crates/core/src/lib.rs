//! Energy-aware real-time scheduling on two-type heterogeneous multicores.

pub mod baselines;
pub mod fixtures;
pub mod gantt;
pub mod io;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod partition;
pub mod pipeline;
pub mod simplex;
pub mod speedprofile;
pub mod validate;
