//! Sumset geometry: arcs on the circle, box unions, higher-order sumsets.

mod boxes;
mod circle;
mod higher;

pub use boxes::{
    bm_check, box_difference_volume, box_difference_volume_capped, BmCheck, BoxUnion, DiffVolume, DEFAULT_PAIR_CAP,
};
pub use circle::{
    arc_difference, kneser_check, kneser_equality_classify, kneser_suite, random_arcset, zn_difference_measure, ArcSet,
    CharacterPreimage, KneserCheck, KneserMismatch, KneserSuiteReport,
};
pub use higher::{higher_order_sumset_volume, SumsetVolume};
