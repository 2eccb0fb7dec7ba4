pub mod df_core;
pub mod identities;
pub mod integrators;
pub mod json;
pub mod lie_data;
pub mod special_functions;
