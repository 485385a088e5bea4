//! Exact public-private learning on small finite domains: Yatracos class,
//! public-data cover, representative domain, SmallDB, and minimum-distance
//! selection.

mod class;
mod cover;
mod finite;
mod learn;
mod smalldb;

pub use class::{yatracos_class, HypothesisSet};
pub use cover::{
    public_cover, representative_domain, support_mask, CoverResult, RepresentativeDomain,
};
pub use finite::{FiniteDist, MAX_DOMAIN};
pub use learn::{
    minimum_distance_select, yatracos_learn, YatracosDemo, YatracosOutcome, YatracosTrial,
};
pub use smalldb::{
    multiset_count, smalldb, smalldb_distribution, DbSize, SmallDbResult, SMALLDB_CAP,
};
