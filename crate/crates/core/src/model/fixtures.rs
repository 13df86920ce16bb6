//! Small networks shipped with the crate.
//!
//! * `chain`: A -> B with B independent of A.
//! * `dep`: A -> B with B dependent on A.
//! * `vee`: A -> C <- B.
//! * `masked`: Z <- W <- P where a concept of W hides a value of W that is
//!   independent of P.
//! * `tracks`: the train-tracks story: someone is found at the tracks after
//!   either going there by one of 99 methods or being kidnapped.

use super::Network;

pub const CHAIN_JSON: &str = include_str!("../../fixtures/chain.json");
pub const DEP_JSON: &str = include_str!("../../fixtures/dep.json");
pub const VEE_JSON: &str = include_str!("../../fixtures/vee.json");
pub const TRACKS_JSON: &str = include_str!("../../fixtures/tracks.json");
pub const MASKED_JSON: &str = include_str!("../../fixtures/masked.json");
pub const CYCLIC_JSON: &str = include_str!("../../fixtures/cyclic.json");

fn load(text: &str) -> Network {
    Network::from_json(text).expect("shipped fixtures are valid")
}

pub fn chain() -> Network {
    load(CHAIN_JSON)
}

pub fn dep() -> Network {
    load(DEP_JSON)
}

pub fn vee() -> Network {
    load(VEE_JSON)
}

pub fn tracks() -> Network {
    load(TRACKS_JSON)
}

pub fn masked() -> Network {
    load(MASKED_JSON)
}
